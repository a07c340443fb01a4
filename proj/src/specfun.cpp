#include "qgs/specfun.hpp"

#include <math.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <sstream>
#include <utility>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "qgs/double_double.hpp"
#include "qgs/errors.hpp"

namespace qgs::specfun {

namespace {

constexpr int kMaxSeriesTerms = 20000;
constexpr double kCertifiedRelError = 1e-14;
// Results this close to a zero of ₁F₁ cannot carry relative digits; they
// are certified to an absolute error instead.
constexpr double kNearZero = 1e-26;
constexpr double kCertifiedAbsError = 1e-28;

bool is_nonpositive_integer(double x) { return x <= 0.0 && std::floor(x) == x; }

struct SeriesResult {
  DoubleDouble sum;
  double magnitude = 0.0;  // Σ |term|
  double error = 0.0;      // running bound on the absolute rounding error
};

// Plain Taylor series Σ (a)_k z^k / ((b)_k k!) in double-double.
SeriesResult kummer_series(double a, double b, double z) {
  constexpr double u = DoubleDouble::epsilon();
  SeriesResult r;
  DoubleDouble term(1.0);
  r.sum = term;
  r.magnitude = 1.0;
  double term_rel = 0.0;  // relative error carried by the current term
  const DoubleDouble zz(z);
  for (int k = 0; k < kMaxSeriesTerms; ++k) {
    const double ak = a + k;
    if (ak == 0.0) return r;  // terminating polynomial
    // a + k and b + k are exact in double for the half-integer parameters
    // used here; each of the four double-double operations adds <= 2u.
    term = term * DoubleDouble(ak) * zz / (DoubleDouble(b + k) * DoubleDouble(k + 1.0));
    term_rel += 8.0 * u;
    r.sum += term;
    const double t = std::abs(static_cast<double>(term));
    if (!std::isfinite(t)) throw OverflowError("hyp1f1: series overflow");
    r.magnitude += t;
    r.error += t * term_rel + 2.0 * u * std::abs(static_cast<double>(r.sum));
    // Past the largest term the tail is dominated by a geometric series.
    if (k > std::abs(z) && t <= 1e-34 * r.magnitude) return r;
  }
  throw ConvergenceError("hyp1f1: series did not converge");
}

double certify(const SeriesResult& s, double scale, const char* what) {
  const double value = static_cast<double>(s.sum);
  const double err = s.error;
  const bool relative_ok = err <= kCertifiedRelError * std::abs(value);
  const bool absolute_ok = std::abs(value) <= kNearZero && err <= kCertifiedAbsError;
  if (!relative_ok && !absolute_ok) {
    std::ostringstream msg;
    msg << what << ": cannot certify result (|sum|=" << std::abs(value)
        << ", Σ|terms|=" << s.magnitude << ")";
    throw CertificationError(msg.str());
  }
  return value * scale;
}

}  // namespace

double ln_gamma(double x) {
  if (!(x > 0.0)) throw DomainError("ln_gamma: x must be positive");
  int sign = 0;
  // Reentrant variant: std::lgamma may write the global signgam.
  return ::lgamma_r(x, &sign);
}

double hyp1f1(double a, double b, double z) {
  if (is_nonpositive_integer(b)) throw DomainError("hyp1f1: b must not be zero or a negative integer");
  if (z == 0.0 || a == 0.0) return 1.0;
  if (z >= -30.0) {
    if (z > 700.0) throw OverflowError("hyp1f1: argument too large");
    return certify(kummer_series(a, b, z), 1.0, "hyp1f1");
  }
  // Kummer: ₁F₁(a; b; z) = e^z ₁F₁(b - a; b; -z)
  if (z < -700.0) throw CertificationError("hyp1f1: argument too negative");
  return certify(kummer_series(b - a, b, -z), std::exp(z), "hyp1f1 (Kummer)");
}

double gaussian_moment(const MomentParams& p) {
  if (!(p.a > 0.0)) throw DomainError("gaussian_moment: a must be positive");
  if (p.n < 0) throw DomainError("gaussian_moment: n must be nonnegative");
  const double n = p.n;
  const double z = p.b * p.b / (4.0 * p.a);
  const double log_a = std::log(p.a);
  if (p.n % 2 == 0) {
    // (1 + (-1)^n) √a Γ((1+n)/2) ₁F₁((1+n)/2; 1/2; z) / (2 a^{n/2+1})
    const double scale = std::exp(ln_gamma((1.0 + n) / 2.0) - (n + 1.0) / 2.0 * log_a);
    return scale * hyp1f1((1.0 + n) / 2.0, 0.5, z);
  }
  if (p.b == 0.0) return 0.0;
  // (-1 + (-1)^n) b Γ(1+n/2) ₁F₁(1+n/2; 3/2; z) / (2 a^{n/2+1})
  const double scale = std::exp(ln_gamma(1.0 + n / 2.0) - (n / 2.0 + 1.0) * log_a);
  return -p.b * scale * hyp1f1(1.0 + n / 2.0, 1.5, z);
}

QuadratureEstimate quadrature_moment_estimate(const MomentParams& p, double rel_tol) {
  if (!(p.a > 0.0)) throw DomainError("quadrature_moment: a must be positive");
  if (p.n < 0) throw DomainError("quadrature_moment: n must be nonnegative");
  if (!std::isfinite(p.a) || !std::isfinite(p.b)) throw DomainError("quadrature_moment: parameters must be finite");
  const double half_width =
      std::max(20.0, (std::abs(p.b) + 10.0 * std::sqrt(p.n + 1.0)) / p.a + 10.0 / std::sqrt(p.a));
  const auto integrand = [&](double q) {
    return std::pow(q, p.n) * std::exp(-p.a * q * q - p.b * q);
  };
  // Split at the Gaussian centre so the first Kronrod panel always sees the peak.
  const double centre = std::clamp(-p.b / (2.0 * p.a), -half_width, half_width);
  using Rule = boost::math::quadrature::gauss_kronrod<double, 31>;
  QuadratureEstimate out;
  for (const auto& [lo, hi] : {std::pair{-half_width, centre}, std::pair{centre, half_width}}) {
    if (hi <= lo) continue;
    double err = 0.0;
    double l1 = 0.0;
    out.value += Rule::integrate(integrand, lo, hi, 30, rel_tol, &err, &l1);
    out.error += err;
    out.l1_norm += l1;
  }
  const double allowed = std::max(rel_tol * out.l1_norm, 1e-10 * (1.0 + std::abs(out.value)));
  if (!(out.error <= allowed)) {
    std::ostringstream msg;
    msg << "quadrature_moment: estimated error " << out.error << " exceeds " << allowed;
    throw ConvergenceError(msg.str());
  }
  return out;
}

double quadrature_moment(const MomentParams& p) { return quadrature_moment_estimate(p).value; }

ExactInt binomial(int n, int k) {
  if (n < 0 || k < 0 || k > n) throw DomainError("binomial: need 0 <= k <= n");
  if (n > kMaxBinomialN) throw OverflowError("binomial: n exceeds 128");
  k = std::min(k, n - k);
  ExactInt c = 1;
  // c * m / i is integral at every step. Dividing out gcd(c, i) first keeps
  // the intermediate product no larger than the next coefficient.
  for (int i = 1; i <= k; ++i) {
    const auto m = static_cast<ExactInt>(n - k + i);
    ExactInt g = c, r = static_cast<ExactInt>(i);
    while (r != 0) g = std::exchange(r, g % r);
    c = (c / g) * (m / (static_cast<ExactInt>(i) / g));
  }
  return c;
}

std::string to_string(ExactInt v) {
  if (v == 0) return "0";
  std::string s;
  while (v > 0) {
    s.push_back(static_cast<char>('0' + static_cast<int>(v % 10)));
    v /= 10;
  }
  std::reverse(s.begin(), s.end());
  return s;
}

}  // namespace qgs::specfun
