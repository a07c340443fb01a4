#pragma once

// Moments E[e^{-a²-b²} a^s b^t] of one real component pair (a, b) of the
// field, with a ~ N(μ, n̄₁/2), b ~ N(η, n̄₂/2), corr(a, b) = g.
//
// Multiplying the Gaussian by e^{-a²-b²} gives another Gaussian (the
// "tilted" frame) times e^{L}/√D. In that frame a is normal and b given a is
// normal, so E[a^s b^t] is a finite polynomial in five scalars. None of them
// divide by 1 - g², so g = 1 is an ordinary input.
//
// Every entry carries mag = Σ |monomial terms|; the rounding error of the
// entry is bounded by gamma() * mag.

#include <algorithm>
#include <cmath>
#include <type_traits>
#include <vector>

#include "qgs/double_double.hpp"

namespace qgs::detail {

// Pascal's triangle in T. Exact while the entries fit the significand,
// otherwise within n rounding steps, which gamma() below accounts for.
template <class T>
class BinomialTable {
 public:
  explicit BinomialTable(int n_max) : n_(n_max), c_((n_max + 1) * (n_max + 1), T(0.0)) {
    for (int n = 0; n <= n_max; ++n) {
      c_[n * (n_ + 1)] = T(1.0);
      for (int k = 1; k <= n; ++k) c_[n * (n_ + 1) + k] = c_[(n - 1) * (n_ + 1) + k - 1] + c_[(n - 1) * (n_ + 1) + k];
    }
  }
  const T& operator()(int n, int k) const { return c_[n * (n_ + 1) + k]; }

 private:
  int n_;
  std::vector<T> c_;
};

template <class T>
class ComponentMoments {
 public:
  // mu, eta: means of a and b. Entries for s <= s_max, t <= t_max.
  ComponentMoments(double n1, double n2, double g, double mu, double eta, int s_max, int t_max,
                   const BinomialTable<T>& binom)
      : s_max_(s_max), t_max_(t_max), val_((s_max + 1) * (t_max + 1)), mag_((s_max + 1) * (t_max + 1)) {
    const T tn1(n1), tn2(n2), tg(g), tmu(mu), teta(eta);
    const T d = (T(1.0) - tg) * (T(1.0) + tg);
    const T root = sqrt(tn2 / tn1);
    const T c = tg * sqrt(tn1 * tn2);
    const T D = T(1.0) + tn1 + tn2 + tn1 * tn2 * d;
    const T h2 = T(1.0) + tn2 * d;

    const T mean_a = ((T(1.0) + tn2) * tmu - c * teta) / D;
    const T var_a = tn1 * h2 / (T(2.0) * D);
    const T slope = tg * root / h2;
    const T offset = (teta - tmu * tg * root) / h2;
    const T var_b = tn2 * d / (T(2.0) * h2);

    const double Dd = ScalarTraits<T>::to_double(D);
    const double cd = g * std::sqrt(n1 * n2);
    const double quad = ((1.0 + n2) * mu * mu - 2.0 * cd * mu * eta + (1.0 + n1) * eta * eta) / Dd;
    log_scale_ = -quad - 0.5 * std::log(Dd);

    // E[a^n] for n <= s_max + t_max.
    const int n_tot = s_max + t_max;
    std::vector<T> amom(n_tot + 1), mean_pow(n_tot + 1), gauss_a(n_tot + 1);
    std::vector<double> amag(n_tot + 1);
    powers(mean_a, mean_pow);
    central_moments(var_a, gauss_a);
    for (int n = 0; n <= n_tot; ++n) {
      T sum(0.0);
      double m = 0.0;
      for (int i = 0; i <= n; i += 2) {
        const T term = binom(n, i) * mean_pow[n - i] * gauss_a[i];
        sum += term;
        m += ScalarTraits<T>::magnitude(term);
      }
      amom[n] = sum;
      amag[n] = m;
    }

    // E[b^t | a] = Σ_j poly[j] a^j.
    std::vector<T> slope_pow(t_max + 1), offset_pow(t_max + 1), gauss_b(t_max + 1);
    powers(slope, slope_pow);
    powers(offset, offset_pow);
    central_moments(var_b, gauss_b);
    std::vector<T> poly(t_max + 1);
    std::vector<double> pmag(t_max + 1);
    for (int t = 0; t <= t_max; ++t) {
      std::fill(poly.begin(), poly.end(), T(0.0));
      std::fill(pmag.begin(), pmag.end(), 0.0);
      for (int k = 0; k <= t; k += 2) {
        const T head = binom(t, k) * gauss_b[k];
        for (int j = 0; j <= t - k; ++j) {
          const T term = head * binom(t - k, j) * slope_pow[j] * offset_pow[t - k - j];
          poly[j] += term;
          pmag[j] += ScalarTraits<T>::magnitude(term);
        }
      }
      for (int s = 0; s <= s_max; ++s) {
        T sum(0.0);
        double m = 0.0;
        for (int j = 0; j <= t; ++j) {
          sum += poly[j] * amom[s + j];
          m += pmag[j] * amag[s + j];
        }
        val_[index(s, t)] = sum;
        mag_[index(s, t)] = m;
      }
    }
  }

  /// E_tilted[a^s b^t]; multiply by exp(log_scale()) for E[e^{-a²-b²} a^s b^t].
  const T& value(int s, int t) const { return val_[index(s, t)]; }
  double magnitude(int s, int t) const { return mag_[index(s, t)]; }
  double log_scale() const { return log_scale_; }

  /// Relative rounding bound per unit of magnitude.
  double gamma() const { return 4.0 * (s_max_ + t_max_ + 4) * ScalarTraits<T>::unit_roundoff; }

 private:
  int index(int s, int t) const { return s * (t_max_ + 1) + t; }

  static void powers(const T& x, std::vector<T>& out) {
    T p(1.0);
    for (auto& o : out) {
      o = p;
      p = p * x;
    }
  }

  // (i-1)!! var^{i/2} for even i, zero for odd i.
  static void central_moments(const T& var, std::vector<T>& out) {
    T m(1.0);
    for (std::size_t i = 0; i < out.size(); ++i) {
      if (i % 2 == 1) {
        out[i] = T(0.0);
        continue;
      }
      out[i] = m;
      m = m * T(static_cast<double>(i + 1)) * var;
    }
  }

  int s_max_;
  int t_max_;
  std::vector<T> val_;
  std::vector<double> mag_;
  double log_scale_ = 0.0;
};

}  // namespace qgs::detail
