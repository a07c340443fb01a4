#include <doctest.h>

#include <cmath>
#include <numbers>

#include "oracles.hpp"
#include "qgs/errors.hpp"
#include "qgs/fock_stats.hpp"
#include "qgs/mc_oracle.hpp"
#include "qgs/scan.hpp"

using namespace qgs;

namespace {

constexpr double pi = std::numbers::pi;

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

double total(const JointPND& j) {
  double s = 0.0;
  for (double v : j.p) s += v;
  return s;
}

}  // namespace

TEST_CASE("coeffs: direct substitution") {
  const CoeffSet c = coeffs({1.0, 1.0, 0.0, {}, {}}, Component::real_part);
  CHECK(c.x == 2.0);
  CHECK(c.y == 2.0);
  CHECK(c.z == 0.0);
  CHECK(c.u == 0.0);
  CHECK(c.v == 0.0);
  CHECK(c.w == 0.0);
  CHECK_THROWS_AS(coeffs({1.0, 1.0, 1.0, {}, {}}, Component::real_part), DegenerateError);
}

TEST_CASE("coeffs: exponent is negative definite") {
  for (double n1 : {0.05, 1.0, 9.0})
    for (double n2 : {0.2, 3.0})
      for (double g : {0.0, 0.4, 0.99, 0.999999}) {
        const CoeffSet c = coeffs({n1, n2, g, {0.3, 0.2}, {-0.1, 0.5}}, Component::imag_part);
        CHECK(c.x > 0.0);
        CHECK(c.y > 0.0);
        CHECK(c.x * c.y - c.z * c.z > 0.0);
      }
}

// Re-derive the coefficients from log(P e^{-|α|²-|β|²}) by finite differences.
TEST_CASE("coeffs: independent re-derivation from the density") {
  for (const TwoPointParams& p : {TwoPointParams{2.0, 0.5, 0.6, {1.0, 0.0}, {0.0, 0.0}},
                                  TwoPointParams{0.7, 1.3, 0.35, {0.4, -0.8}, {-0.6, 0.25}}}) {
    for (Component comp : {Component::real_part, Component::imag_part}) {
      const bool re = comp == Component::real_part;
      // Hold the other component at its mean so that it contributes a constant.
      const auto f = [&](double a, double b) {
        const cplx al = re ? cplx(a, p.mu1.imag()) : cplx(p.mu1.real(), a);
        const cplx be = re ? cplx(b, p.mu2.imag()) : cplx(p.mu2.real(), b);
        const double other = re ? std::norm(cplx(0.0, p.mu1.imag())) + std::norm(cplx(0.0, p.mu2.imag()))
                                : std::norm(cplx(p.mu1.real(), 0.0)) + std::norm(cplx(p.mu2.real(), 0.0));
        return std::log(joint_pdf(p, al, be)) - std::norm(al) - std::norm(be) + other;
      };
      const double h = 1e-2;
      const double f00 = f(0, 0);
      const double x = -0.5 * (f(h, 0) - 2 * f00 + f(-h, 0)) / (h * h);
      const double y = -0.5 * (f(0, h) - 2 * f00 + f(0, -h)) / (h * h);
      const double z = 0.5 * (f(h, h) - f(h, -h) - f(-h, h) + f(-h, -h)) / (4 * h * h);
      const double u = (f(h, 0) - f(-h, 0)) / (2 * h);
      const double v = (f(0, h) - f(0, -h)) / (2 * h);
      const double d = 1.0 - p.g * p.g;
      const double w = f00 + 2.0 * std::log(pi * std::sqrt(p.n1 * p.n2 * d));
      const CoeffSet c = coeffs(p, comp);
      CHECK(c.x == doctest::Approx(x).epsilon(1e-7));
      CHECK(c.y == doctest::Approx(y).epsilon(1e-7));
      CHECK(c.z == doctest::Approx(z).epsilon(1e-7));
      CHECK(c.u == doctest::Approx(u).epsilon(1e-7).scale(1.0));
      CHECK(c.v == doctest::Approx(v).epsilon(1e-7).scale(1.0));
      CHECK(c.w == doctest::Approx(w).epsilon(1e-7).scale(1.0));
    }
  }
}

TEST_CASE("moment_integral_closed examples") {
  CHECK(rel(moment_integral_closed({1.0, 1.0, 0.0, 0.0, 0.0, 0.0}, 0, 0), pi) < 1e-15);
  CHECK(moment_integral_closed({1.0, 1.0, 0.0, 0.0, 0.0, 0.0}, 1, 0) == 0.0);
  CHECK(std::abs(moment_integral_closed({2.0, 1.5, 0.4, 0.0, 0.0, 0.0}, 1, 0)) < 1e-15);
  const double ref = oracle::moment_2d(2.0, 2.0, 0.5, 0.3, -0.1, 0.0, 2, 3);
  CHECK(std::abs(moment_integral_closed({2.0, 2.0, 0.5, 0.3, -0.1, 0.0}, 2, 3) - ref) < 1e-10);
  CHECK_THROWS_AS(moment_integral_closed({1.0, 1.0, 1.5, 0, 0, 0}, 0, 0), DomainError);
  CHECK_THROWS_AS(moment_integral_closed({-1.0, 1.0, 0.0, 0, 0, 0}, 0, 0), DomainError);
}

TEST_CASE("moment_integral_closed against 2D quadrature on a grid") {
  for (const CoeffSet& c : {CoeffSet{1.2, 0.9, -0.4, 0.5, 0.2, -0.1}, CoeffSet{3.0, 2.0, 1.1, -0.7, 0.9, 0.3}}) {
    for (int N = 0; N <= 5; ++N)
      for (int M = 0; M <= 5; ++M) {
        const double ref = oracle::moment_2d(c.x, c.y, c.z, c.u, c.v, c.w, N, M);
        CHECK_MESSAGE(std::abs(moment_integral_closed(c, N, M) - ref) <= 1e-10 * (1.0 + std::abs(ref)),
                      "N=" << N << " M=" << M);
      }
  }
}

TEST_CASE("rho_element: thermal vacuum and phase averaging") {
  const double n = 0.8;
  const cplx v = rho_element({n, n, 0.0, {}, {}}, {0, 0, 0, 0});
  CHECK(rel(v.real(), 1.0 / ((1 + n) * (1 + n))) < 1e-14);
  CHECK(v.imag() == 0.0);
  // Independent zero-mean modes: every off-diagonal element vanishes.
  for (const FockIndex& idx : {FockIndex{1, 0, 0, 0}, FockIndex{2, 1, 1, 1}, FockIndex{0, 3, 1, 2}, FockIndex{4, 4, 2, 6}})
    CHECK(std::abs(rho_element({1.0, 1.4, 0.0, {}, {}}, idx)) < 1e-15);
  // Correlated zero-mean modes are only invariant under a common phase, so
  // elements with N+M != K+L vanish and the others need not.
  for (double g : {0.5, 0.97, 1.0}) {
    for (const FockIndex& idx : {FockIndex{1, 0, 0, 0}, FockIndex{2, 1, 1, 1}, FockIndex{3, 3, 0, 1}})
      CHECK(std::abs(rho_element({1.0, 1.4, g, {}, {}}, idx)) < 1e-15);
    CHECK(std::abs(rho_element({1.0, 1.4, g, {}, {}}, {1, 0, 0, 1})) > 1e-3);
  }
  const cplx q = rho_element_quadrature({1.0, 1.4, 0.5, {}, {}}, {1, 0, 0, 1});
  CHECK(std::abs(q - rho_element({1.0, 1.4, 0.5, {}, {}}, {1, 0, 0, 1})) < 1e-12);
}

TEST_CASE("rho_element(1,1,1,1) against a Monte Carlo Poisson mixture") {
  const TwoPointParams p{1.0, 1.0, 0.5, {0.5, 0.0}, {0.0, 0.5}};
  oracle::FieldDraws draw(p.n1, p.n2, p.g, p.mu1, p.mu2, 424242);
  const int n = 10'000'000;
  double s = 0.0, s2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const auto [a, b] = draw();
    const double f = oracle::poisson_pmf(std::norm(a), 1) * oracle::poisson_pmf(std::norm(b), 1);
    s += f;
    s2 += f * f;
  }
  const double mean = s / n;
  const double se = std::sqrt((s2 / n - mean * mean) / n);
  const double exact = rho_element(p, {1, 1, 1, 1}).real();
  CHECK(std::abs(exact - mean) < 4.0 * se);
}

TEST_CASE("rho_element agrees with the literal substitution sum") {
  for (const TwoPointParams& p : {TwoPointParams{1.0, 1.0, 0.5, {0.5, 0.0}, {0.0, 0.5}},
                                  TwoPointParams{0.6, 1.7, 0.8, {0.3, -0.4}, {0.9, 0.2}},
                                  TwoPointParams{2.0, 0.5, 0.0, {-0.7, 0.1}, {0.2, 0.3}}}) {
    for (int N = 0; N <= 3; ++N)
      for (int M = 0; M <= 3; ++M)
        for (int K = 0; K <= 3; ++K)
          for (int L = 0; L <= 3; ++L) {
            const cplx a = rho_element(p, {N, M, K, L});
            const cplx b = rho_element_substitution(p, {N, M, K, L});
            CHECK_MESSAGE(std::abs(a - b) <= 1e-10 * std::max(std::abs(a), 1e-3),
                          N << M << K << L << " " << a << " vs " << b);
          }
  }
}

TEST_CASE("rho_element_quadrature examples") {
  CHECK(rel(rho_element_quadrature({1.0, 1.0, 0.0, {}, {}}, {0, 0, 0, 0}).real(), 0.25) < 1e-12);
  CHECK(std::abs(rho_element_quadrature({1.0, 2.0, 0.4, {}, {}}, {1, 0, 0, 0})) < 1e-15);
  const TwoPointParams p{0.9, 1.6, 0.7, {0.4, 0.3}, {-0.2, 0.6}};
  const cplx q = rho_element_quadrature(p, {2, 1, 2, 1});
  const cplx r = rho_element(p, {2, 1, 2, 1});
  CHECK(std::abs(q - r) <= 1e-6 * std::abs(r));
  CHECK_THROWS_AS(rho_element_quadrature({1.0, 1.0, 1.0, {}, {}}, {0, 0, 0, 0}), DegenerateError);
  CHECK_THROWS_AS(rho_element_quadrature(p, {6, 6, 6, 6}), DomainError);
}

TEST_CASE("rho_element index checks") {
  const TwoPointParams p{1.0, 1.0, 0.3, {}, {}};
  CHECK_THROWS_AS(rho_element(p, {20, 20, 20, 5}), DomainError);
  CHECK_THROWS_AS(rho_element(p, {-1, 0, 0, 0}), DomainError);
  CHECK_NOTHROW(rho_element(p, {16, 16, 16, 16}));
}

TEST_CASE("joint_pnd: independent thermal modes") {
  const JointPND j = joint_pnd({1.0, 1.0, 0.0, {}, {}}, 10);
  for (int N = 0; N <= 10; ++N)
    for (int M = 0; M <= 10; ++M) CHECK(rel(j(N, M), std::ldexp(1.0, -N - M - 2)) < 1e-13);
}

TEST_CASE("joint_pnd: truncation grows until the tail tolerance is met") {
  const TwoPointParams p{1.5, 0.8, 0.6, {0.7, 0.1}, {0.4, -0.3}};
  const JointPND j = joint_pnd(p, 2, {1e-9, 64});
  CHECK(j.tail_met);
  CHECK(j.n_max > 2);
  CHECK(j.tail_mass < 1e-9);
  CHECK(std::abs(total(j) + j.tail_mass - 1.0) < 1e-9);
  const JointPND capped = joint_pnd(p, 2, {1e-9, 4});
  CHECK(capped.n_max == 4);
  CHECK_FALSE(capped.tail_met);
  CHECK(capped.tail_mass > 1e-9);
}

TEST_CASE("joint_pnd entries equal the diagonal of rho_element") {
  const TwoPointParams p{0.9, 0.4, 0.8, {0.8, -0.2}, {0.5, 0.3}};
  const JointPND j = joint_pnd(p, 16, {1e-6, 16});
  for (int N = 0; N <= 16; N += 3)
    for (int M = 0; M <= 16; M += 4) CHECK(rel(j(N, M), rho_element(p, {N, M, N, M}).real()) < 1e-9);
}

TEST_CASE("single_mode_pnd examples") {
  const auto be = single_mode_pnd(1.0, 0.0, 2);
  CHECK(be[0] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(be[1] == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(be[2] == doctest::Approx(0.125).epsilon(1e-15));
  const auto pois = single_mode_pnd(0.0, 1.0, 12);
  for (int N = 0; N <= 12; ++N) CHECK(rel(pois[N], std::exp(-1.0 - std::lgamma(N + 1.0))) < 1e-13);
  for (double nbar : {0.1, 0.5, 2.0, 7.0})
    for (double m : {0.3, 1.0, 4.0}) {
      const auto p = single_mode_pnd(nbar, std::polar(std::sqrt(m), 0.4), 40);
      for (int N = 0; N <= 40; ++N) CHECK(rel(p[N], oracle::displaced_thermal(nbar, m, N)) < 1e-12);
    }
  CHECK_THROWS_AS(single_mode_pnd(-0.1, 0.0, 3), DomainError);
}

TEST_CASE("single_mode_pnd(0.5, 1) against a Monte Carlo Poisson mixture") {
  oracle::FieldDraws draw(0.5, 0.5, 0.0, 1.0, 0.0, 99);
  const int n = 10'000'000, K = 8;
  std::vector<double> s(K, 0.0), s2(K, 0.0);
  for (int i = 0; i < n; ++i) {
    const double lam = std::norm(draw().first);
    for (int k = 0; k < K; ++k) {
      const double f = oracle::poisson_pmf(lam, k);
      s[k] += f;
      s2[k] += f * f;
    }
  }
  const auto exact = single_mode_pnd(0.5, 1.0, K - 1);
  for (int k = 0; k < K; ++k) {
    const double mean = s[k] / n;
    const double se = std::sqrt((s2[k] / n - mean * mean) / n);
    CHECK_MESSAGE(std::abs(exact[k] - mean) < 4.0 * se, "k=" << k);
  }
}

TEST_CASE("wavepacket_g2 examples") {
  const JointPND ind = joint_pnd({1.3, 0.6, 0.0, {0.5, 0.2}, {0.1, 0.4}}, 12, {1e-12, 64});
  for (int N = 0; N <= 12; ++N)
    for (int M = 0; M <= 12; ++M) CHECK(wavepacket_g2(ind, N, M) == doctest::Approx(1.0).epsilon(1e-9));

  const BeamProfile beam = fit_g2_zero(1.7, {1.0, {1.0, 0.0}, 4.0, 1.0});
  const JointPND bunched = joint_pnd(two_point_params(beam, 0.0, 0.0), 16, {1e-10, 64});
  for (int N : {1, 5, 8, 16}) CHECK(wavepacket_g2(bunched, N, N) > 1.0);
  for (int N : {5, 8, 16}) CHECK(wavepacket_g2(bunched, N, 1) < 1.0);

  const JointPND tiny = joint_pnd({0.01, 0.01, 0.2, {}, {}}, 16, {1e-6, 16});
  CHECK_THROWS_AS(wavepacket_g2(tiny, 16, 0), UnderflowError);
  CHECK_THROWS_AS(wavepacket_g2(tiny, 17, 0), DomainError);
}

TEST_CASE("wavepacket_g2(5,1) against the Monte Carlo estimator") {
  const TwoPointParams p{1.0, 1.0, 0.9, {1.0, 0.0}, {1.0, 0.0}};
  const JointPND j = joint_pnd(p, 16, {1e-10, 64});
  const double exact = wavepacket_g2(j, 5, 1);
  CHECK(exact < 1.0);
  SamplerConfig cfg{p, 10'000'000, 5150, 1, 64};
  const G2Estimate est = empirical_g2(empirical_pnd(cfg), 5, 1);
  CHECK(est.reliable);
  CHECK(std::abs(est.estimate - exact) < 4.0 * est.std_error);
}

TEST_CASE("classical_g2 examples") {
  const JointPND thermal = joint_pnd({1.0, 1.0, 1.0, {}, {}}, 16, {1e-13, 64});
  CHECK(classical_g2(thermal) == doctest::Approx(2.0).epsilon(1e-9));
  const JointPND coherent = joint_pnd({1e-12, 1e-12, 1.0, {1.0, 0.0}, {1.0, 0.0}}, 16, {1e-13, 64});
  CHECK(classical_g2(coherent) == doctest::Approx(1.0).epsilon(1e-9));

  CHECK(thermal_fraction_for_g2(1.7) == doctest::Approx(1.0 - std::sqrt(0.3)).epsilon(1e-9));
  const BeamProfile beam = fit_g2_zero(1.7, {1.0, {1.0, 0.0}, 4.0, 1.0});
  const TwoPointParams p = two_point_params(beam, 0.0, 0.0);
  const JointPND j = joint_pnd(p, 16, {1e-12, 64});
  CHECK(std::abs(classical_g2(j) - 1.7) < 1e-3);
  CHECK(std::abs(classical_g2_gaussian(p) - 1.7) < 1e-3);

  const JointPND loose = joint_pnd(p, 3, {1e-2, 3});
  CHECK_THROWS_AS(classical_g2(loose), TruncationError);
}

TEST_CASE("vacuum_identity_check") {
  CHECK(vacuum_identity_check(0));
  CHECK(vacuum_identity_check(1));
  CHECK(vacuum_identity_check(16));
  CHECK(vacuum_identity_check(64));
  CHECK_THROWS_AS(vacuum_identity_check(65), DomainError);
}

TEST_CASE("property: normalization with adaptive truncation") {
  for (const TwoPointParams& p : {TwoPointParams{2.0, 1.0, 0.7, {1.0, 0.5}, {0.3, -0.6}},
                                  TwoPointParams{4.0, 4.0, 0.99, {}, {}}, TwoPointParams{0.3, 0.1, 0.0, {1.5, 0.0}, {0.0, 0.2}}}) {
    const JointPND j = joint_pnd(p, 4);
    CHECK(j.tail_met);
    CHECK(total(j) >= 1.0 - 1e-6);
  }
}

TEST_CASE("property: hermiticity") {
  const TwoPointParams p{1.1, 0.7, 0.65, {0.4, -0.5}, {0.8, 0.3}};
  for (int N = 0; N <= 12; ++N)
    for (int M = 0; N + M <= 12; ++M)
      for (int K = 0; N + M + K <= 12; ++K)
        for (int L = 0; N + M + K + L <= 12; ++L) {
          const cplx a = rho_element(p, {N, M, K, L});
          const cplx b = rho_element(p, {K, L, N, M});
          CHECK(std::abs(a - std::conj(b)) <= 1e-10);
        }
}

TEST_CASE("property: diagonal positivity") {
  for (double g : {0.0, 0.5, 0.9, 0.999999, 1.0}) {
    const JointPND j = joint_pnd({1.4, 0.9, g, {-0.6, 0.9}, {0.7, -0.2}}, 24, {1e-6, 24});
    for (double v : j.p) CHECK(v >= -1e-10);
    for (int N = 0; N <= 10; N += 2) CHECK(rho_element(j.params, {N, 10 - N, N, 10 - N}).real() >= -1e-10);
  }
}

TEST_CASE("property: factorization at g = 0") {
  const TwoPointParams p{1.7, 0.4, 0.0, {0.6, -0.3}, {-0.2, 0.5}};
  const JointPND j = joint_pnd(p, 20, {1e-6, 20});
  const auto a = single_mode_pnd(p.n1, p.mu1, 20);
  const auto b = single_mode_pnd(p.n2, p.mu2, 20);
  for (int N = 0; N <= 20; ++N)
    for (int M = 0; M <= 20; ++M) CHECK(std::abs(j(N, M) - a[N] * b[M]) <= 1e-9);
}

TEST_CASE("property: split-thermal limit near g = 1") {
  const double n1 = 1.2, n2 = 0.5;
  const JointPND j = joint_pnd({n1, n2, 1.0 - 1e-6, {}, {}}, 40, {1e-9, 64});
  const double c2 = n1 / (n1 + n2);
  double tv = j.tail_mass;
  for (int N = 0; N <= j.n_max; ++N)
    for (int M = 0; M <= j.n_max; ++M) {
      const double split = oracle::bose_einstein(n1 + n2, N + M) *
                           static_cast<double>(oracle::pascal_row(N + M)[N]) * std::pow(c2, N) *
                           std::pow(1.0 - c2, M);
      tv += std::abs(j(N, M) - split);
    }
  CHECK(0.5 * tv < 1e-3);
}

TEST_CASE("property: marginals are independent of g") {
  for (double g : {0.0, 0.3, 0.8, 0.999, 1.0}) {
    const TwoPointParams p{1.3, 0.6, g, {0.5, 0.4}, {-0.3, 0.2}};
    const JointPND j = joint_pnd(p, 10, {1e-12, 64});
    const auto a = single_mode_pnd(p.n1, p.mu1, j.n_max);
    for (int N = 0; N <= j.n_max; ++N) {
      double row = 0.0;
      for (int M = 0; M <= j.n_max; ++M) row += j(N, M);
      CHECK(std::abs(row - a[N]) <= 1e-8);
    }
  }
}

TEST_CASE("property: zero-mean marginals are Bose-Einstein") {
  for (double g : {0.0, 0.6, 1.0}) {
    const JointPND j = joint_pnd({0.9, 2.1, g, {}, {}}, 10, {1e-13, 64});
    for (int N = 0; N <= j.n_max; ++N) {
      double row = 0.0, col = 0.0;
      for (int M = 0; M <= j.n_max; ++M) {
        row += j(N, M);
        col += j(M, N);
      }
      CHECK(std::abs(row - oracle::bose_einstein(0.9, N)) <= 1e-10);
      CHECK(std::abs(col - oracle::bose_einstein(2.1, N)) <= 1e-10);
    }
  }
}

TEST_CASE("property: sixteen-photon elements survive cancellation") {
  // Opposite-sign means make the moment sums alternate.
  const TwoPointParams p{1.5, 1.5, 0.95, {1.2, -0.8}, {-1.1, 0.9}};
  const JointPND j = joint_pnd(p, 16, {1e-6, 32});
  const auto a = single_mode_pnd(p.n1, p.mu1, j.n_max);
  for (int N = 14; N <= 16; ++N) {
    double row = 0.0;
    for (int M = 0; M <= j.n_max; ++M) row += j(N, M);
    CHECK(std::abs(row - a[N]) <= 1e-6 * a[N] + j.tail_mass);
  }
  CHECK(rel(rho_element(p, {16, 16, 16, 16}).real(), j(16, 16)) < 1e-8);
}
