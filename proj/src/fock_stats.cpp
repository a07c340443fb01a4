#include "qgs/fock_stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "qgs/double_double.hpp"
#include "qgs/errors.hpp"
#include "qgs/specfun.hpp"
#include "tilted_moments.hpp"

namespace qgs {

namespace {

using specfun::ExactInt;
using SignedExact = __int128;

constexpr double kEscalateRelError = 1e-8;
constexpr double kRequiredRelError = 1e-6;
constexpr double kAbsoluteFloor = 1e-18;

struct GaussInt {
  SignedExact re = 0;
  SignedExact im = 0;
};

GaussInt operator*(const GaussInt& a, const GaussInt& b) {
  return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
}

// i^q for an exact quadrant index q.
GaussInt unit_power(int q) {
  switch (((q % 4) + 4) % 4) {
    case 0: return {1, 0};
    case 1: return {0, 1};
    case 2: return {-1, 0};
    default: return {0, -1};
  }
}

// Coefficients of a1^s a2^{N+K-s} in (a1 + i a2)^N (a1 - i a2)^K.
std::vector<GaussInt> expansion_coeffs(int N, int K) {
  std::vector<GaussInt> c(N + K + 1);
  for (int n = 0; n <= N; ++n) {
    for (int k = 0; k <= K; ++k) {
      const auto b = static_cast<SignedExact>(specfun::binomial(N, n) * specfun::binomial(K, k));
      const GaussInt ph = unit_power((N - n) + 3 * (K - k));
      c[n + k].re += b * ph.re;
      c[n + k].im += b * ph.im;
    }
  }
  return c;
}

double log_factorial(int n) { return specfun::ln_gamma(n + 1.0); }

void check_index(const FockIndex& idx, int max_order) {
  if (idx.N < 0 || idx.M < 0 || idx.K < 0 || idx.L < 0) throw DomainError("FockIndex: negative photon number");
  if (idx.order() > max_order) {
    std::ostringstream msg;
    msg << "FockIndex: order " << idx.order() << " exceeds max order " << max_order;
    throw DomainError(msg.str());
  }
  if (max_order > specfun::kMaxBinomialN) throw DomainError("FockIndex: max order above 128 is unsupported");
}

// value * exp(log_scale) without intermediate overflow.
double apply_scale(double value, double log_scale) {
  if (value == 0.0) return 0.0;
  return std::copysign(std::exp(std::log(std::abs(value)) + log_scale), value);
}

struct RhoSum {
  double re = 0.0;
  double im = 0.0;
  double err = 0.0;  // absolute, same units as re/im
  double log_scale = 0.0;
};

template <class T>
RhoSum rho_sum(const TwoPointParams& p, const FockIndex& idx) {
  const int sa = idx.N + idx.K;
  const int sb = idx.M + idx.L;
  detail::BinomialTable<T> binom(sa + sb);
  const detail::ComponentMoments<T> re(p.n1, p.n2, p.g, p.mu1.real(), p.mu2.real(), sa, sb, binom);
  const detail::ComponentMoments<T> im(p.n1, p.n2, p.g, p.mu1.imag(), p.mu2.imag(), sa, sb, binom);
  const auto ca = expansion_coeffs(idx.N, idx.K);
  const auto cb = expansion_coeffs(idx.M, idx.L);

  T sum_re(0.0), sum_im(0.0);
  double mag = 0.0;
  for (int s = 0; s <= sa; ++s) {
    for (int t = 0; t <= sb; ++t) {
      const GaussInt c = ca[s] * cb[t];
      if (c.re == 0 && c.im == 0) continue;
      const T prod = re.value(s, t) * im.value(sa - s, sb - t);
      sum_re += T(c.re) * prod;
      sum_im += T(c.im) * prod;
      const double cmag = std::abs(static_cast<double>(c.re)) + std::abs(static_cast<double>(c.im));
      mag += cmag * re.magnitude(s, t) * im.magnitude(sa - s, sb - t);
    }
  }
  RhoSum out;
  out.re = ScalarTraits<T>::to_double(sum_re);
  out.im = ScalarTraits<T>::to_double(sum_im);
  out.err = 3.0 * std::max(re.gamma(), im.gamma()) * mag;
  out.log_scale = re.log_scale() + im.log_scale() -
                  0.5 * (log_factorial(idx.N) + log_factorial(idx.M) + log_factorial(idx.K) + log_factorial(idx.L));
  return out;
}

bool rho_sum_ok(const RhoSum& r, bool diagonal, double tol) {
  const double size = diagonal ? std::abs(r.re) : std::hypot(r.re, r.im);
  if (r.err <= tol * size) return true;
  if (diagonal) return false;
  return apply_scale(r.err, r.log_scale) <= kAbsoluteFloor;
}

void validate_coeffs(const CoeffSet& c) {
  if (!(c.x > 0.0) || !(c.y > 0.0) || !(c.x * c.y > c.z * c.z))
    throw DomainError("CoeffSet: need x > 0, y > 0 and xy > z²");
}

}  // namespace

CoeffSet coeffs(const TwoPointParams& p, Component component) {
  validate(p);
  if (p.degenerate()) throw DegenerateError("coeffs: exponent undefined at g = 1");
  const double d = (1.0 - p.g) * (1.0 + p.g);
  const double mu = component == Component::real_part ? p.mu1.real() : p.mu1.imag();
  const double eta = component == Component::real_part ? p.mu2.real() : p.mu2.imag();
  CoeffSet c;
  c.x = (1.0 + p.n1 * d) / (p.n1 * d);
  c.y = (1.0 + p.n2 * d) / (p.n2 * d);
  c.z = p.g / (std::sqrt(p.n1 * p.n2) * d);
  // x - 1 and y - 1 written out to avoid cancellation for large n̄d.
  const double xm1 = 1.0 / (p.n1 * d);
  const double ym1 = 1.0 / (p.n2 * d);
  c.u = 2.0 * (mu * xm1 - eta * c.z);
  c.v = 2.0 * (eta * ym1 - mu * c.z);
  c.w = 2.0 * mu * eta * c.z - xm1 * mu * mu - ym1 * eta * eta;
  return c;
}

double moment_integral_closed(const CoeffSet& c, int N, int M) {
  validate_coeffs(c);
  if (N < 0 || M < 0) throw DomainError("moment_integral_closed: negative order");
  const double ew = std::exp(c.w);
  if (c.z == 0.0)
    return specfun::gaussian_moment({c.x, -c.u, N}) * specfun::gaussian_moment({c.y, -c.v, M}) * ew;
  // b = b' + r a with r = z / y:
  //   -(x - z²/y) a² - y b'² + (u + r v) a + v b' + w
  const double r = c.z / c.y;
  const double a_eff = c.x - c.z * r;
  const double b_eff = -(c.u + r * c.v);
  DoubleDouble sum;
  double r_pow = 1.0;  // r^{M-k}, k descending
  for (int k = M; k >= 0; --k) {
    const double coef = static_cast<double>(specfun::binomial(M, k)) * r_pow;
    const double fa = specfun::gaussian_moment({a_eff, b_eff, N + M - k});
    const double fb = specfun::gaussian_moment({c.y, -c.v, k});
    sum += DoubleDouble(coef) * DoubleDouble(fa) * DoubleDouble(fb);
    r_pow *= r;
  }
  return static_cast<double>(sum) * ew;
}

cplx rho_element(const TwoPointParams& p, const FockIndex& idx, int max_order) {
  validate(p);
  check_index(idx, max_order);
  const bool diagonal = idx.N == idx.K && idx.M == idx.L;
  RhoSum r = rho_sum<double>(p, idx);
  if (!rho_sum_ok(r, diagonal, kEscalateRelError)) {
    r = rho_sum<DoubleDouble>(p, idx);
    if (!rho_sum_ok(r, diagonal, kRequiredRelError)) {
      std::ostringstream msg;
      msg << "rho_element(" << idx.N << "," << idx.M << "," << idx.K << "," << idx.L
          << "): cancellation leaves fewer than 6 digits";
      throw PrecisionLossError(msg.str());
    }
  }
  if (diagonal) return {apply_scale(r.re, r.log_scale), 0.0};
  return {apply_scale(r.re, r.log_scale), apply_scale(r.im, r.log_scale)};
}

cplx rho_element_substitution(const TwoPointParams& p, const FockIndex& idx) {
  validate(p);
  check_index(idx, kDefaultMaxOrder);
  const CoeffSet cr = coeffs(p, Component::real_part);
  const CoeffSet ci = coeffs(p, Component::imag_part);
  const int sa = idx.N + idx.K;
  const int sb = idx.M + idx.L;
  const auto ca = expansion_coeffs(idx.N, idx.K);
  const auto cb = expansion_coeffs(idx.M, idx.L);
  std::vector<double> ire((sa + 1) * (sb + 1)), iim((sa + 1) * (sb + 1));
  for (int s = 0; s <= sa; ++s)
    for (int t = 0; t <= sb; ++t) {
      ire[s * (sb + 1) + t] = moment_integral_closed(cr, s, t);
      iim[s * (sb + 1) + t] = moment_integral_closed(ci, s, t);
    }
  DoubleDouble sum_re, sum_im;
  for (int s = 0; s <= sa; ++s)
    for (int t = 0; t <= sb; ++t) {
      const GaussInt c = ca[s] * cb[t];
      const DoubleDouble prod = DoubleDouble(ire[s * (sb + 1) + t]) * DoubleDouble(iim[(sa - s) * (sb + 1) + sb - t]);
      sum_re += DoubleDouble(c.re) * prod;
      sum_im += DoubleDouble(c.im) * prod;
    }
  // Density prefactor 1 / (π √(n̄₁ n̄₂ (1 - g²))) per component.
  const double d = (1.0 - p.g) * (1.0 + p.g);
  const double log_scale = -2.0 * std::log(std::numbers::pi) - std::log(p.n1 * p.n2 * d) -
                           0.5 * (log_factorial(idx.N) + log_factorial(idx.M) + log_factorial(idx.K) +
                                  log_factorial(idx.L));
  return {apply_scale(static_cast<double>(sum_re), log_scale),
          apply_scale(static_cast<double>(sum_im), log_scale)};
}

std::vector<double> single_mode_pnd(double nbar, cplx mu, int n_max) {
  if (!(nbar >= 0.0) || !std::isfinite(nbar)) throw DomainError("single_mode_pnd: nbar must be nonnegative");
  if (n_max < 0) throw DomainError("single_mode_pnd: n_max must be nonnegative");
  const double m2 = std::norm(mu);
  const double log_norm = -m2 / (1.0 + nbar) - std::log1p(nbar);
  // P(N) = e^{-|μ|²/(1+n̄)}/(1+n̄) Σ_k C(N,k)/k! A^{N-k} B^k
  const double log_a = nbar > 0.0 ? std::log(nbar / (1.0 + nbar)) : -std::numeric_limits<double>::infinity();
  const double log_b = m2 > 0.0 ? std::log(m2) - 2.0 * std::log1p(nbar) : -std::numeric_limits<double>::infinity();
  std::vector<double> lf(n_max + 1);
  for (int i = 0; i <= n_max; ++i) lf[i] = log_factorial(i);
  std::vector<double> out(n_max + 1);
  std::vector<double> logs;
  for (int N = 0; N <= n_max; ++N) {
    logs.clear();
    for (int k = 0; k <= N; ++k) {
      if (N - k > 0 && nbar == 0.0) continue;
      if (k > 0 && m2 == 0.0) continue;
      const double la = N - k > 0 ? (N - k) * log_a : 0.0;
      const double lb = k > 0 ? k * log_b : 0.0;
      logs.push_back(lf[N] - lf[k] - lf[N - k] - lf[k] + la + lb);
    }
    if (logs.empty()) {
      out[N] = 0.0;
      continue;
    }
    const double top = *std::max_element(logs.begin(), logs.end());
    double acc = 0.0;
    for (double l : logs) acc += std::exp(l - top);
    out[N] = std::exp(log_norm + top + std::log(acc));
  }
  return out;
}

double single_mode_tail(double nbar, cplx mu, int n_max) {
  const std::vector<double> head = single_mode_pnd(nbar, mu, n_max);
  CompensatedSum sum;
  for (double v : head) sum += v;
  return std::max(0.0, 1.0 - sum.value());
}

JointPND joint_pnd(const TwoPointParams& p, int n_max, const PndOptions& opts) {
  validate(p);
  if (n_max < 0) throw DomainError("joint_pnd: n_max must be nonnegative");
  if (opts.hard_cap > specfun::kMaxBinomialN / 2) throw DomainError("joint_pnd: hard cap above 64 is unsupported");
  if (!(opts.tail_tolerance > 0.0)) throw DomainError("joint_pnd: tail tolerance must be positive");
  int n = std::min(n_max, opts.hard_cap);
  while (n < opts.hard_cap &&
         single_mode_tail(p.n1, p.mu1, n) + single_mode_tail(p.n2, p.mu2, n) >= opts.tail_tolerance)
    ++n;

  // With the tables scaled by 1/(j! k!) the binomials and factorials of
  // p(N,M) cancel exactly: p = e^{L}/D Σ_{j,k} R̃(2j,2k) Q̃(2N-2j,2M-2k).
  const auto compute = [&](auto tag, double tol, std::vector<double>& out) {
    using T = decltype(tag);
    const int smax = 2 * n;
    detail::BinomialTable<T> binom(2 * smax);
    const detail::ComponentMoments<T> re(p.n1, p.n2, p.g, p.mu1.real(), p.mu2.real(), smax, smax, binom);
    const detail::ComponentMoments<T> im(p.n1, p.n2, p.g, p.mu1.imag(), p.mu2.imag(), smax, smax, binom);
    const double gamma = 3.0 * std::max(re.gamma(), im.gamma());
    const double log_base = re.log_scale() + im.log_scale();
    std::vector<T> inv_fact(n + 1);
    inv_fact[0] = T(1.0);
    for (int i = 1; i <= n; ++i) inv_fact[i] = inv_fact[i - 1] / T(static_cast<double>(i));
    const std::size_t w = n + 1;
    std::vector<T> rs(w * w), qs(w * w);
    std::vector<double> rmag(w * w), qmag(w * w);
    for (int j = 0; j <= n; ++j) {
      for (int k = 0; k <= n; ++k) {
        const T f = inv_fact[j] * inv_fact[k];
        const double fd = ScalarTraits<T>::to_double(f);
        rs[j * w + k] = re.value(2 * j, 2 * k) * f;
        qs[j * w + k] = im.value(2 * j, 2 * k) * f;
        rmag[j * w + k] = re.magnitude(2 * j, 2 * k) * fd;
        qmag[j * w + k] = im.magnitude(2 * j, 2 * k) * fd;
      }
    }
    out.assign(w * w, 0.0);
    double worst = 0.0;
    for (int N = 0; N <= n; ++N) {
      for (int M = 0; M <= n; ++M) {
        T sum(0.0);
        double mag = 0.0;
        for (int j = 0; j <= N; ++j) {
          for (int k = 0; k <= M; ++k) {
            const std::size_t a = j * w + k;
            const std::size_t b = (N - j) * w + (M - k);
            sum += rs[a] * qs[b];
            mag += rmag[a] * qmag[b];
          }
        }
        const double v = ScalarTraits<T>::to_double(sum);
        worst = std::max(worst, gamma * mag / std::abs(v));
        out[N * w + M] = apply_scale(v, log_base);
      }
    }
    return worst <= tol;
  };

  JointPND out;
  out.n_max = n;
  out.params = p;
  out.tail_tolerance = opts.tail_tolerance;
  if (!compute(0.0, kEscalateRelError, out.p) && !compute(DoubleDouble(0.0), kRequiredRelError, out.p))
    throw PrecisionLossError("joint_pnd: cancellation leaves fewer than 6 digits");

  CompensatedSum total;
  for (double& v : out.p) {
    if (v < -1e-12) throw PrecisionLossError("joint_pnd: negative probability");
    v = std::max(v, 0.0);
    total += v;
  }
  out.tail_mass = 1.0 - total.value();
  out.tail_met = out.tail_mass < opts.tail_tolerance;
  out.marginal1 = single_mode_pnd(p.n1, p.mu1, n);
  out.marginal2 = single_mode_pnd(p.n2, p.mu2, n);
  return out;
}

double wavepacket_g2(const JointPND& pnd, int N, int M, double floor) {
  if (N < 0 || M < 0 || N > pnd.n_max || M > pnd.n_max)
    throw DomainError("wavepacket_g2: photon numbers must lie within the truncation");
  const double r = pnd.marginal1[N];
  const double c = pnd.marginal2[M];
  if (r < floor || c < floor) {
    std::ostringstream msg;
    msg << "wavepacket_g2(" << N << "," << M << "): marginal below floor " << floor;
    throw UnderflowError(msg.str());
  }
  return pnd(N, M) / r / c;
}

double classical_g2_gaussian(const TwoPointParams& p) {
  validate(p);
  const double c = p.g * std::sqrt(p.n1 * p.n2);
  const double i1 = std::norm(p.mu1) + p.n1;
  const double i2 = std::norm(p.mu2) + p.n2;
  return 1.0 + (2.0 * c * (std::conj(p.mu1) * p.mu2).real() + c * c) / (i1 * i2);
}

double classical_g2(const JointPND& pnd) {
  if (!pnd.tail_met) throw TruncationError("classical_g2: tail tolerance not met");
  CompensatedSum m1, m2, m12;
  for (int N = 0; N <= pnd.n_max; ++N) {
    for (int M = 0; M <= pnd.n_max; ++M) {
      const double v = pnd(N, M);
      m1 += N * v;
      m2 += M * v;
      m12 += static_cast<double>(N) * M * v;
    }
  }
  const double pnd_value = m12.value() / (m1.value() * m2.value());
  const double gaussian = classical_g2_gaussian(pnd.params);
  if (!(std::abs(pnd_value - gaussian) <= 1e-6 * gaussian)) {
    std::ostringstream msg;
    msg.precision(12);
    msg << "classical_g2: truncated distribution gives " << pnd_value << ", Gaussian moments give " << gaussian;
    throw TruncationError(msg.str());
  }
  return pnd_value;
}

bool vacuum_identity_check(int n_max) {
  if (n_max < 0 || n_max > kDefaultMaxOrder) throw DomainError("vacuum_identity_check: n_max must lie in [0, 64]");
  for (int n = 0; n <= n_max; ++n) {
    SignedExact sum = 0;
    for (int k = 0; k <= n; ++k) {
      const auto b = static_cast<SignedExact>(specfun::binomial(n, k));
      sum += (k % 2 == 0) ? b : -b;
    }
    if (sum != (n == 0 ? 1 : 0)) return false;
  }
  return true;
}

}  // namespace qgs
