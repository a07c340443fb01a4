#include "qgs/source_model.hpp"

#include <cmath>
#include <numbers>

#include "qgs/errors.hpp"

namespace qgs {

void validate(const BeamProfile& profile) {
  if (!(profile.n_peak > 0.0)) throw DomainError("BeamProfile: n_peak must be positive");
  if (!(profile.sigma0 > 0.0)) throw DomainError("BeamProfile: sigma0 must be positive");
  if (!(profile.sigma1 > 0.0)) throw DomainError("BeamProfile: sigma1 must be positive");
  if (!std::isfinite(profile.mu_peak.real()) || !std::isfinite(profile.mu_peak.imag()))
    throw DomainError("BeamProfile: mu_peak must be finite");
}

void validate(const TwoPointParams& p) {
  if (!(p.n1 > 0.0) || !(p.n2 > 0.0)) throw DomainError("TwoPointParams: n1 and n2 must be positive");
  if (!(p.g >= 0.0 && p.g <= 1.0)) throw DomainError("TwoPointParams: g must lie in [0, 1]");
  if (!std::isfinite(p.n1) || !std::isfinite(p.n2)) throw DomainError("TwoPointParams: n1, n2 must be finite");
}

ProfilePoint profile_at(const BeamProfile& profile, double s) {
  const double envelope = std::exp(-s * s / profile.sigma0);
  return {profile.n_peak * envelope, profile.mu_peak * envelope};
}

double degree_of_coherence(const BeamProfile& profile, double s1, double s2) {
  const double d = s1 - s2;
  return std::exp(-d * d / profile.sigma1);
}

TwoPointParams two_point_params(const BeamProfile& profile, double s1, double s2) {
  const ProfilePoint a = profile_at(profile, s1);
  const ProfilePoint b = profile_at(profile, s2);
  return {a.nbar, b.nbar, degree_of_coherence(profile, s1, s2), a.mu, b.mu};
}

cplx cross_spectral_density(const TwoPointParams& p) {
  return std::conj(p.mu1) * p.mu2 + p.g * std::sqrt(p.n1 * p.n2);
}

MeanCov mean_cov(const TwoPointParams& p) {
  validate(p);
  MeanCov mc;
  mc.mu << p.mu1.real(), p.mu1.imag(), p.mu2.real(), p.mu2.imag();
  const double c = 0.5 * p.g * std::sqrt(p.n1 * p.n2);
  mc.gamma << 0.5 * p.n1, 0.0, c, 0.0,
              0.0, 0.5 * p.n1, 0.0, c,
              c, 0.0, 0.5 * p.n2, 0.0,
              0.0, c, 0.0, 0.5 * p.n2;
  mc.degenerate = p.degenerate();
  return mc;
}

double gaussian_pdf(const MeanCov& mc, const Eigen::Vector4d& r) {
  const Eigen::LDLT<Eigen::Matrix4d> ldlt(mc.gamma);
  const Eigen::Vector4d d = ldlt.vectorD();
  const double scale = mc.gamma.diagonal().cwiseAbs().maxCoeff();
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive() || !(d.minCoeff() > 1e-14 * scale))
    throw SingularMatrixError("gaussian_pdf: covariance is not positive definite");
  const Eigen::Vector4d x = r - mc.mu;
  const double quad = x.dot(ldlt.solve(x));
  const double log_det = d.array().log().sum();
  return std::exp(-0.5 * quad - 0.5 * log_det) / (4.0 * std::numbers::pi * std::numbers::pi);
}

double joint_pdf(const TwoPointParams& p, cplx alpha, cplx beta) {
  validate(p);
  if (p.degenerate()) throw DegenerateError("joint_pdf: density does not exist at g = 1");
  const double one_minus_g2 = (1.0 - p.g) * (1.0 + p.g);
  const cplx da = alpha - p.mu1;
  const cplx db = beta - p.mu2;
  const double exponent = -(std::norm(da) / p.n1 + std::norm(db) / p.n2 -
                            2.0 * p.g * (std::conj(da) * db).real() / std::sqrt(p.n1 * p.n2)) /
                          one_minus_g2;
  const double norm = std::numbers::pi * std::numbers::pi * p.n1 * p.n2 * one_minus_g2;
  return std::exp(exponent) / norm;
}

}  // namespace qgs
