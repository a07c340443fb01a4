// Direct numerical integration of ⟨N,M|ρ|K,L⟩ = E[e^{-|α|²-|β|²} α^N α*^K β^M β*^L] / √(N!M!K!L!).
//
// Deliberately generic: the Gaussian weight P(r) e^{-|r|²} is recombined
// with plain 4×4 linear algebra and integrated on a tensor Gauss-Hermite
// grid, sharing nothing with the hand-derived moment formulas.

#include <cmath>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

#include "qgs/errors.hpp"
#include "qgs/fock_stats.hpp"
#include "qgs/specfun.hpp"

namespace qgs {

namespace {

struct HermiteRule {
  std::vector<double> nodes;
  std::vector<double> weights;  // for weight e^{-x²}
};

// Golub-Welsch: eigenvalues of the Jacobi matrix of the Hermite recurrence.
HermiteRule gauss_hermite(int n) {
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k) J(k, k - 1) = J(k - 1, k) = std::sqrt(k / 2.0);
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
  HermiteRule r;
  for (int i = 0; i < n; ++i) {
    r.nodes.push_back(es.eigenvalues()(i));
    const double v = es.eigenvectors()(0, i);
    r.weights.push_back(std::sqrt(std::numbers::pi) * v * v);
  }
  return r;
}

cplx ipow(cplx z, int k) {
  cplx r = 1.0;
  for (; k > 0; --k) r *= z;
  return r;
}

struct Estimate {
  cplx value;
  double l1 = 0.0;
};

Estimate integrate(const Eigen::Vector4d& mean, const Eigen::Matrix4d& chol, const FockIndex& idx, int n) {
  const HermiteRule h = gauss_hermite(n);
  const Eigen::Matrix4d A = std::sqrt(2.0) * chol;
  cplx sum = 0.0;
  double l1 = 0.0;
  Eigen::Vector4d x;
  for (int i0 = 0; i0 < n; ++i0)
    for (int i1 = 0; i1 < n; ++i1)
      for (int i2 = 0; i2 < n; ++i2)
        for (int i3 = 0; i3 < n; ++i3) {
          x << h.nodes[i0], h.nodes[i1], h.nodes[i2], h.nodes[i3];
          const Eigen::Vector4d r = mean + A * x;
          const cplx alpha(r(0), r(1));
          const cplx beta(r(2), r(3));
          const cplx f = ipow(alpha, idx.N) * ipow(std::conj(alpha), idx.K) * ipow(beta, idx.M) *
                         ipow(std::conj(beta), idx.L);
          const double w = h.weights[i0] * h.weights[i1] * h.weights[i2] * h.weights[i3];
          sum += w * f;
          l1 += w * std::abs(f);
        }
  const double norm = std::numbers::pi * std::numbers::pi;
  return {sum / norm, l1 / norm};
}

}  // namespace

cplx rho_element_quadrature(const TwoPointParams& p, const FockIndex& idx) {
  if (idx.N < 0 || idx.M < 0 || idx.K < 0 || idx.L < 0) throw DomainError("FockIndex: negative photon number");
  if (idx.order() > 20) throw DomainError("rho_element_quadrature: order above 20");
  const MeanCov mc = mean_cov(p);
  if (mc.degenerate) throw DegenerateError("rho_element_quadrature: requires g < 1");

  // N(r; μ, Γ) e^{-rᵀr} = C N(r; m, S) with S⁻¹ = Γ⁻¹ + 2I, m = S Γ⁻¹ μ.
  const Eigen::LLT<Eigen::Matrix4d> gl(mc.gamma);
  if (gl.info() != Eigen::Success) throw SingularMatrixError("rho_element_quadrature: covariance not SPD");
  const Eigen::Matrix4d gamma_inv = gl.solve(Eigen::Matrix4d::Identity());
  const Eigen::Matrix4d precision = gamma_inv + 2.0 * Eigen::Matrix4d::Identity();
  const Eigen::LLT<Eigen::Matrix4d> pl(precision);
  const Eigen::Matrix4d S = pl.solve(Eigen::Matrix4d::Identity());
  const Eigen::Vector4d h = gamma_inv * mc.mu;
  const Eigen::Vector4d m = S * h;
  const double log_c = -0.5 * mc.mu.dot(h) + 0.5 * m.dot(h) + 0.5 * (std::log(S.determinant()) - std::log(mc.gamma.determinant()));
  const Eigen::Matrix4d chol = Eigen::LLT<Eigen::Matrix4d>(S).matrixL();

  const double log_fact = 0.5 * (specfun::ln_gamma(idx.N + 1.0) + specfun::ln_gamma(idx.M + 1.0) +
                                 specfun::ln_gamma(idx.K + 1.0) + specfun::ln_gamma(idx.L + 1.0));
  const double scale = std::exp(log_c - log_fact);

  // The integrand is a polynomial of degree order(); n nodes integrate
  // degree 2n - 1 exactly, so both grids are exact up to rounding.
  const int n = idx.order() / 2 + 2;
  const Estimate coarse = integrate(m, chol, idx, n);
  const Estimate fine = integrate(m, chol, idx, n + 4);
  const double tol = 1e-9 * std::max(std::abs(fine.value), 1e-3 * fine.l1);
  if (!(std::abs(fine.value - coarse.value) <= tol))
    throw ConvergenceError("rho_element_quadrature: refinement changed the result");
  return fine.value * scale;
}

}  // namespace qgs
