#pragma once

// Partially coherent beam: a coherent amplitude plus Gaussian-Schell
// thermal light, reduced to the statistics seen by two point detectors.

#include <complex>

#include <Eigen/Dense>

namespace qgs {

using cplx = std::complex<double>;

/// g at or above 1 - kDegeneracyTolerance is treated as the g = 1 limit.
inline constexpr double kDegeneracyTolerance = 1e-9;

struct BeamProfile {
  double n_peak = 1.0;
  cplx mu_peak{0.0, 0.0};
  double sigma0 = 1.0;  // intensity width, exponent -s²/σ₀
  double sigma1 = 1.0;  // coherence width, exponent -Δs²/σ₁
};

struct TwoPointParams {
  double n1 = 1.0;
  double n2 = 1.0;
  double g = 0.0;
  cplx mu1{0.0, 0.0};
  cplx mu2{0.0, 0.0};

  bool degenerate() const { return g >= 1.0 - kDegeneracyTolerance; }
  friend bool operator==(const TwoPointParams&, const TwoPointParams&) = default;
};

struct ProfilePoint {
  double nbar = 0.0;
  cplx mu{0.0, 0.0};
};

/// Mean (Re μ₁, Im μ₁, Re μ₂, Im μ₂) and covariance of the real field components.
struct MeanCov {
  Eigen::Vector4d mu = Eigen::Vector4d::Zero();
  Eigen::Matrix4d gamma = Eigen::Matrix4d::Identity();
  bool degenerate = false;
};

/// Throws DomainError unless n_peak, sigma0 and sigma1 are positive.
void validate(const BeamProfile& profile);
/// Throws DomainError unless n1, n2 > 0 and 0 <= g <= 1.
void validate(const TwoPointParams& p);

ProfilePoint profile_at(const BeamProfile& profile, double s);
double degree_of_coherence(const BeamProfile& profile, double s1, double s2);
TwoPointParams two_point_params(const BeamProfile& profile, double s1, double s2);

/// W(s₁, s₂) = μ₁* μ₂ + g √(n̄₁ n̄₂).
cplx cross_spectral_density(const TwoPointParams& p);

/// Exact covariance; at g = 1 the result is flagged degenerate (det Γ = 0).
MeanCov mean_cov(const TwoPointParams& p);

/// Density of the real 4-vector. Uses an LDLᵀ factorization of Γ.
/// Throws SingularMatrixError when Γ is not numerically positive definite.
double gaussian_pdf(const MeanCov& mc, const Eigen::Vector4d& r);

/// Density over the coherent amplitudes (α, β). Throws DegenerateError at g = 1.
double joint_pdf(const TwoPointParams& p, cplx alpha, cplx beta);

}  // namespace qgs
