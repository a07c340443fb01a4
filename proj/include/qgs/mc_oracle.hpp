#pragma once

// Monte Carlo realization of the two-detector state: draw the classical
// field (α, β) from its Gaussian law, then count photons as independent
// Poisson variates with means |α|², |β|².
//
// Randomness is derived per sample index from the master seed, so every
// result is bit-identical for any worker count.

#include <cstdint>
#include <optional>
#include <limits>
#include <random>
#include <utility>
#include <vector>

#include "qgs/fock_stats.hpp"
#include "qgs/source_model.hpp"

namespace qgs {

struct SamplerConfig {
  TwoPointParams params;
  std::uint64_t n_samples = 1;
  std::uint64_t seed = 0;
  int n_workers = 1;
  int max_count = 64;  // counts above this land in overflow_count
};

/// SplitMix64 as a UniformRandomBitGenerator.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;
  explicit SplitMix64(std::uint64_t state) : state_(state) {}
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
  result_type operator()();
  /// Uniform on [0, 1) with 53 random bits.
  double uniform();

 private:
  std::uint64_t state_;
};

/// Generator for sample `index` of a run seeded with `seed`.
SplitMix64 sample_rng(std::uint64_t seed, std::uint64_t index);

/// Poisson variate: sequential inversion below mean 30, PTRS rejection above.
std::uint64_t poisson(double mean, SplitMix64& rng);

struct FieldSample {
  cplx alpha;
  cplx beta;
};

/// Draws r = μ + C z with C Cᵀ = Γ. Cholesky for g <= 0.999, symmetric
/// eigen-factor above, and the exact rank-2 sampler
/// β = μ₂ + √(n̄₂/n̄₁)(α - μ₁) in the g = 1 limit.
class FieldSampler {
 public:
  explicit FieldSampler(const TwoPointParams& p);
  FieldSample operator()(SplitMix64& rng) const;

 private:
  MeanCov mc_;
  Eigen::Matrix4d factor_;
  bool degenerate_ = false;
  double sd1_ = 0.0;
  double ratio_ = 0.0;
};

std::vector<FieldSample> sample_fields(const SamplerConfig& cfg);

std::pair<std::uint64_t, std::uint64_t> sample_counts(const FieldSample& field, SplitMix64& rng);

struct EmpiricalPND {
  TwoPointParams params;
  int max_count = 64;
  std::vector<std::uint64_t> counts;  // row-major, (max_count + 1)²
  std::uint64_t total = 0;
  std::uint64_t seed = 0;
  std::uint64_t overflow_count = 0;
  // Exact integer moment sums over all samples, overflow included.
  std::uint64_t sum_n1 = 0;
  std::uint64_t sum_n2 = 0;
  std::uint64_t sum_n1n2 = 0;
  std::uint64_t sum_n1_sq = 0;
  std::uint64_t sum_n2_sq = 0;
  std::uint64_t sum_n1n2_sq = 0;

  std::uint64_t operator()(int N, int M) const {
    return counts[static_cast<std::size_t>(N) * (max_count + 1) + M];
  }
  std::uint64_t row_sum(int N) const;
  std::uint64_t col_sum(int M) const;
};

EmpiricalPND empirical_pnd(const SamplerConfig& cfg);

struct G2Estimate {
  double estimate = 0.0;
  double std_error = 0.0;
  bool reliable = false;  // both marginal counts >= 100
};

/// counts(N,M) total / (row(N) col(M)) with a delta-method standard error.
/// Returns NaN with reliable = false when a marginal count is zero.
G2Estimate empirical_g2(const EmpiricalPND& e, int N, int M);

struct CompareOptions {
  double z_threshold = 4.0;
  double min_expected = 25.0;
  double max_failing_fraction = 0.005;
  std::optional<double> tv_threshold;  // unset: no total variation gate
};

struct CellCheck {
  int N = 0;
  int M = 0;
  double expected = 0.0;
  std::uint64_t observed = 0;
  double z = 0.0;
};

struct CompareReport {
  std::vector<CellCheck> cells;  // cells with expected >= min_expected
  std::vector<CellCheck> failing;
  std::size_t qualifying = 0;
  double failing_fraction = 0.0;
  double max_abs_z = 0.0;
  double tv_distance = 0.0;  // includes the mass outside the compared square
  bool pass = false;
};

/// Per-cell binomial z-scores and total variation distance. Passes iff at
/// most max_failing_fraction of qualifying cells exceed z_threshold and, when
/// tv_threshold is set, the total variation distance is below it. Throws
/// ParameterMismatchError when the two sides describe different params.
CompareReport compare(const JointPND& analytic, const EmpiricalPND& empirical, const CompareOptions& opts = {});

}  // namespace qgs
