#pragma once

// Special functions behind the closed-form Fock matrix elements: log-gamma,
// Kummer's confluent hypergeometric function, and the generalized Gaussian
// moment integral f(a, b, n) = ∫ q^n exp(-a q² - b q) dq.
//
// All functions are pure and thread-safe.

#include <string>

namespace qgs::specfun {

/// Parameters of ∫ q^n exp(-a q² - b q) dq over the real line.
/// The integral converges only for a > 0.
struct MomentParams {
  double a = 1.0;
  double b = 0.0;
  int n = 0;
};

/// Exact unsigned integer wide enough for binomial(n, k) with n <= 128.
using ExactInt = unsigned __int128;

inline constexpr int kMaxBinomialN = 128;

/// ln Γ(x) for x > 0. Throws DomainError for x <= 0.
double ln_gamma(double x);

/// Kummer's ₁F₁(a; b; z).
///
/// Summed as a Taylor series in double-double arithmetic. Large negative z
/// is mapped through Kummer's transformation e^z ₁F₁(b-a; b; -z). The
/// result is returned only if the accumulated rounding (including
/// cancellation) certifies a relative error below 1e-14. Results below
/// 1e-26 in magnitude (near a zero of ₁F₁) are certified to an absolute
/// 1e-28 instead. Otherwise CertificationError is
/// thrown rather than returning lost digits.
///
/// Throws DomainError when b is zero or a negative integer.
double hyp1f1(double a, double b, double z);

/// f(a, b, n) via the parity-split ₁F₁ closed form. Only the branch that
/// survives for the parity of n is evaluated. Throws DomainError for a <= 0.
double gaussian_moment(const MomentParams& p);

struct QuadratureEstimate {
  double value = 0.0;
  double error = 0.0;    ///< estimated absolute error
  double l1_norm = 0.0;  ///< ∫ |integrand|, the natural scale for relative checks
};

/// Adaptive Gauss-Kronrod quadrature of q^n exp(-a q² - b q) over
/// |q| <= max(20, (|b| + 10√(n+1))/a + 10/√a). Throws ConvergenceError if
/// the estimated error exceeds max(rel_tol * l1_norm, 1e-10 * (1 + |value|)).
QuadratureEstimate quadrature_moment_estimate(const MomentParams& p, double rel_tol = 1e-13);

double quadrature_moment(const MomentParams& p);

/// Exact binomial coefficient. Throws DomainError for k > n or negative
/// arguments and OverflowError for n > kMaxBinomialN.
ExactInt binomial(int n, int k);

std::string to_string(ExactInt v);

}  // namespace qgs::specfun
