#pragma once

// Paired-limb ("double-double") arithmetic: an unevaluated sum hi + lo with
// |lo| <= ulp(hi)/2, giving about 31 significant decimal digits. Used to
// accumulate the alternating sums of the Fock-element assembly and the
// confluent hypergeometric series when double precision cannot certify them.
//
// Requires strict IEEE evaluation; do not compile with -ffast-math.

#include <cmath>
#include <limits>

namespace qgs {

struct DoubleDouble {
  double hi = 0.0;
  double lo = 0.0;

  constexpr DoubleDouble() = default;
  constexpr DoubleDouble(double x) : hi(x), lo(0.0) {}  // NOLINT(implicit)
  constexpr DoubleDouble(double h, double l) : hi(h), lo(l) {}

  explicit DoubleDouble(__int128 v) {
    hi = static_cast<double>(v);
    lo = static_cast<double>(v - static_cast<__int128>(hi));
  }
  explicit DoubleDouble(unsigned __int128 v) {
    hi = static_cast<double>(v);
    const auto h = static_cast<unsigned __int128>(hi);
    lo = v >= h ? static_cast<double>(v - h) : -static_cast<double>(h - v);
  }

  explicit operator double() const { return hi + lo; }

  // 2^-104
  static constexpr double epsilon() { return 4.93038065763132e-32; }
};

namespace dd_detail {

inline DoubleDouble quick_two_sum(double a, double b) {
  const double s = a + b;
  return {s, b - (s - a)};
}

inline DoubleDouble two_sum(double a, double b) {
  const double s = a + b;
  const double bb = s - a;
  return {s, (a - (s - bb)) + (b - bb)};
}

inline DoubleDouble two_prod(double a, double b) {
  const double p = a * b;
  return {p, std::fma(a, b, -p)};
}

}  // namespace dd_detail

inline DoubleDouble operator-(const DoubleDouble& a) { return {-a.hi, -a.lo}; }

inline DoubleDouble operator+(const DoubleDouble& a, const DoubleDouble& b) {
  DoubleDouble s = dd_detail::two_sum(a.hi, b.hi);
  const DoubleDouble t = dd_detail::two_sum(a.lo, b.lo);
  s.lo += t.hi;
  s = dd_detail::quick_two_sum(s.hi, s.lo);
  s.lo += t.lo;
  return dd_detail::quick_two_sum(s.hi, s.lo);
}

inline DoubleDouble operator-(const DoubleDouble& a, const DoubleDouble& b) { return a + (-b); }

inline DoubleDouble operator*(const DoubleDouble& a, const DoubleDouble& b) {
  DoubleDouble p = dd_detail::two_prod(a.hi, b.hi);
  p.lo += a.hi * b.lo + a.lo * b.hi;
  return dd_detail::quick_two_sum(p.hi, p.lo);
}

inline DoubleDouble operator/(const DoubleDouble& a, const DoubleDouble& b) {
  const double q1 = a.hi / b.hi;
  DoubleDouble r = a - b * DoubleDouble(q1);
  const double q2 = r.hi / b.hi;
  r = r - b * DoubleDouble(q2);
  const double q3 = r.hi / b.hi;
  return dd_detail::quick_two_sum(q1, q2) + DoubleDouble(q3);
}

inline DoubleDouble& operator+=(DoubleDouble& a, const DoubleDouble& b) { return a = a + b; }
inline DoubleDouble& operator-=(DoubleDouble& a, const DoubleDouble& b) { return a = a - b; }
inline DoubleDouble& operator*=(DoubleDouble& a, const DoubleDouble& b) { return a = a * b; }
inline DoubleDouble& operator/=(DoubleDouble& a, const DoubleDouble& b) { return a = a / b; }

inline bool operator<(const DoubleDouble& a, const DoubleDouble& b) {
  return a.hi < b.hi || (a.hi == b.hi && a.lo < b.lo);
}
inline bool operator>(const DoubleDouble& a, const DoubleDouble& b) { return b < a; }
inline bool operator==(const DoubleDouble& a, const DoubleDouble& b) {
  return a.hi == b.hi && a.lo == b.lo;
}

inline DoubleDouble abs(const DoubleDouble& a) { return a.hi < 0.0 ? -a : a; }

inline DoubleDouble sqrt(const DoubleDouble& a) {
  if (a.hi <= 0.0) return DoubleDouble(std::sqrt(a.hi));
  const double x = std::sqrt(a.hi);
  const DoubleDouble xx = dd_detail::two_prod(x, x);
  const double correction = ((a - xx).hi) / (2.0 * x);
  return dd_detail::quick_two_sum(x, correction);
}

// Scalar traits shared by the double and double-double code paths.
template <class T>
struct ScalarTraits;

template <>
struct ScalarTraits<double> {
  static constexpr double unit_roundoff = std::numeric_limits<double>::epsilon() / 2;
  static double to_double(double x) { return x; }
  static double magnitude(double x) { return std::abs(x); }
};

template <>
struct ScalarTraits<DoubleDouble> {
  static constexpr double unit_roundoff = DoubleDouble::epsilon();
  static double to_double(const DoubleDouble& x) { return static_cast<double>(x); }
  static double magnitude(const DoubleDouble& x) { return std::abs(x.hi + x.lo); }
};

/// Neumaier-compensated running sum in double precision.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  CompensatedSum& operator+=(double x) {
    add(x);
    return *this;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

}  // namespace qgs
