#pragma once

// Fock-basis matrix elements of the two-detector field state and the
// photon-number statistics derived from them.

#include <string>
#include <vector>

#include "qgs/source_model.hpp"

namespace qgs {

inline constexpr int kDefaultMaxOrder = 64;

/// Matrix element ⟨N,M| ρ |K,L⟩.
struct FockIndex {
  int N = 0;
  int M = 0;
  int K = 0;
  int L = 0;

  int order() const { return N + M + K + L; }
};

/// Coefficients of the real-part or imaginary-part exponent
/// -x a² - y b² + 2z ab + u a + v b + w of P(α, β) e^{-|α|²-|β|²}.
struct CoeffSet {
  double x = 1.0;
  double y = 1.0;
  double z = 0.0;
  double u = 0.0;
  double v = 0.0;
  double w = 0.0;
};

enum class Component { real_part, imag_part };

/// Throws DegenerateError at g = 1 (the exponent is not defined there).
CoeffSet coeffs(const TwoPointParams& p, Component component);

/// ∫∫ a^N b^M exp(-x a² - y b² + 2z ab + u a + v b + w) da db.
///
/// The cross term is removed by the shift b = b' + (z/y) a, giving a single
/// binomial sum of products of one-dimensional gaussian_moment values. For
/// z = 0 only the separable term survives and is evaluated directly.
/// Throws DomainError unless x > 0, y > 0 and xy > z².
double moment_integral_closed(const CoeffSet& c, int N, int M);

/// ⟨N,M| ρ |K,L⟩ by a certified finite sum.
///
/// Works in the Gaussian frame tilted by e^{-|α|²-|β|²}, where every moment
/// is a finite polynomial in the tilted mean and covariance. This stays
/// finite for all g in [0, 1], including the degenerate g = 1 limit.
/// Evaluated in double precision first; repeated in double-double if the
/// running error bound leaves fewer than 8 digits. Throws PrecisionLossError
/// if fewer than 6 digits survive the second pass.
cplx rho_element(const TwoPointParams& p, const FockIndex& idx, int max_order = kDefaultMaxOrder);

/// The same element assembled literally from moment_integral_closed factors.
/// Requires g < 1 and is only accurate while the binomial sums stay tame
/// (moderate photon numbers, g away from 1); used as a cross-check.
cplx rho_element_substitution(const TwoPointParams& p, const FockIndex& idx);

/// Direct tensor-product Gauss-Hermite integration over (Re α, Im α, Re β, Im β).
/// Requires g < 1 and N+M+K+L <= 20. Throws ConvergenceError if two
/// successive node counts disagree beyond 1e-9 relative.
cplx rho_element_quadrature(const TwoPointParams& p, const FockIndex& idx);

struct PndOptions {
  double tail_tolerance = 1e-6;
  int hard_cap = kDefaultMaxOrder;
};

/// Truncated joint photon-number distribution p(N, M), N, M in [0, n_max].
struct JointPND {
  int n_max = 0;
  std::vector<double> p;  // row-major, (n_max + 1)²
  double tail_mass = 0.0;
  double tail_tolerance = 1e-6;
  bool tail_met = false;
  TwoPointParams params;
  // Exact single-detector distributions on [0, n_max].
  std::vector<double> marginal1;
  std::vector<double> marginal2;

  double operator()(int N, int M) const { return p[static_cast<std::size_t>(N) * (n_max + 1) + M]; }
};

/// Diagonal elements p(N, M) for N, M <= n_max, with n_max raised until the
/// exact single-mode tails certify tail_mass < tail_tolerance or the hard
/// cap is reached (tail_met reports which). Accepts the g = 1 limit.
JointPND joint_pnd(const TwoPointParams& p, int n_max, const PndOptions& opts = {});

/// P(N), N = 0..n_max, for a coherent amplitude μ plus thermal light of mean n̄.
std::vector<double> single_mode_pnd(double nbar, cplx mu, int n_max);

/// P(n > n_max) for the same single-mode distribution, summed directly.
double single_mode_tail(double nbar, cplx mu, int n_max);

/// g̃²(N, M) = p(N, M) / (P₁(N) P₂(M)). Throws UnderflowError when either
/// marginal is below floor.
double wavepacket_g2(const JointPND& pnd, int N, int M, double floor = 1e-12);

/// ⟨n₁n₂⟩ / (⟨n₁⟩⟨n₂⟩) from the truncated distribution. Throws
/// TruncationError if it disagrees with classical_g2_gaussian by more than
/// 1e-6 relative, which happens when the tail carries visible weight.
double classical_g2(const JointPND& pnd);

/// ⟨I₁I₂⟩ / (⟨I₁⟩⟨I₂⟩) for the Gaussian field, by Isserlis' theorem:
/// 1 + (2 g √(n̄₁n̄₂) Re(μ₁* μ₂) + g² n̄₁ n̄₂) / ((|μ₁|² + n̄₁)(|μ₂|² + n̄₂)).
double classical_g2_gaussian(const TwoPointParams& p);

/// Σ_k (-1)^k C(n, k) == [n == 0] for every n <= n_max, in exact integers.
bool vacuum_identity_check(int n_max);

}  // namespace qgs
