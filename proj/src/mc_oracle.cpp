#include "qgs/mc_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "qgs/errors.hpp"

namespace qgs {

namespace {

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t poisson_inversion(double mean, SplitMix64& rng) {
  const double u = rng.uniform();
  double p = std::exp(-mean);
  double cdf = p;
  std::uint64_t k = 0;
  while (u > cdf && k < 1000) {
    ++k;
    p *= mean / static_cast<double>(k);
    cdf += p;
  }
  return k;
}

// Hörmann (1993), transformed rejection with squeeze.
std::uint64_t poisson_ptrs(double mean, SplitMix64& rng) {
  const double slam = std::sqrt(mean);
  const double loglam = std::log(mean);
  const double b = 0.931 + 2.53 * slam;
  const double a = -0.059 + 0.02483 * b;
  const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
  const double vr = 0.9277 - 3.6224 / (b - 2.0);
  for (;;) {
    const double u = rng.uniform() - 0.5;
    const double v = rng.uniform();
    const double us = 0.5 - std::abs(u);
    const double k = std::floor((2.0 * a / us + b) * u + mean + 0.43);
    if (us >= 0.07 && v <= vr) return static_cast<std::uint64_t>(k);
    if (k < 0.0 || (us < 0.013 && v > us)) continue;
    if (std::log(v) + std::log(inv_alpha) - std::log(a / (us * us) + b) <= -mean + k * loglam - std::lgamma(k + 1.0))
      return static_cast<std::uint64_t>(k);
  }
}

void check_config(const SamplerConfig& cfg) {
  validate(cfg.params);
  if (cfg.n_samples < 1) throw DomainError("SamplerConfig: n_samples must be at least 1");
  if (cfg.n_workers < 1) throw DomainError("SamplerConfig: n_workers must be at least 1");
  if (cfg.max_count < 0) throw DomainError("SamplerConfig: max_count must be nonnegative");
}

// Runs body(begin, end, worker) over contiguous index blocks.
template <class Body>
void parallel_blocks(std::uint64_t n, int workers, Body body) {
  const auto w = static_cast<std::uint64_t>(std::max(1, workers));
  if (w == 1 || n < 2 * w) {
    body(0, n, 0);
    return;
  }
  std::vector<std::thread> pool;
  for (std::uint64_t i = 0; i < w; ++i) {
    const std::uint64_t lo = n * i / w;
    const std::uint64_t hi = n * (i + 1) / w;
    pool.emplace_back([&body, lo, hi, i] { body(lo, hi, static_cast<int>(i)); });
  }
  for (auto& t : pool) t.join();
}

}  // namespace

SplitMix64::result_type SplitMix64::operator()() {
  state_ += kGolden;
  return mix64(state_);
}

double SplitMix64::uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

SplitMix64 sample_rng(std::uint64_t seed, std::uint64_t index) {
  return SplitMix64(mix64(seed ^ mix64(index + kGolden)));
}

std::uint64_t poisson(double mean, SplitMix64& rng) {
  if (!(mean >= 0.0) || !std::isfinite(mean)) throw DomainError("poisson: mean must be finite and nonnegative");
  if (mean == 0.0) return 0;
  return mean < 30.0 ? poisson_inversion(mean, rng) : poisson_ptrs(mean, rng);
}

FieldSampler::FieldSampler(const TwoPointParams& p) : mc_(mean_cov(p)), factor_(Eigen::Matrix4d::Zero()) {
  if (mc_.degenerate) {
    degenerate_ = true;
    sd1_ = std::sqrt(0.5 * p.n1);
    ratio_ = std::sqrt(p.n2 / p.n1);
    return;
  }
  if (p.g <= 0.999) {
    const Eigen::LLT<Eigen::Matrix4d> llt(mc_.gamma);
    if (llt.info() != Eigen::Success) throw SingularMatrixError("FieldSampler: Cholesky factorization failed");
    factor_ = llt.matrixL();
    return;
  }
  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> es(mc_.gamma);
  if (es.info() != Eigen::Success) throw SingularMatrixError("FieldSampler: eigendecomposition failed");
  const Eigen::Vector4d root = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  factor_ = es.eigenvectors() * root.asDiagonal();
}

FieldSample FieldSampler::operator()(SplitMix64& rng) const {
  std::normal_distribution<double> normal;
  if (degenerate_) {
    const double z0 = normal(rng);
    const double z1 = normal(rng);
    const cplx d(sd1_ * z0, sd1_ * z1);
    return {cplx(mc_.mu(0), mc_.mu(1)) + d, cplx(mc_.mu(2), mc_.mu(3)) + ratio_ * d};
  }
  Eigen::Vector4d z;
  for (int i = 0; i < 4; ++i) z(i) = normal(rng);
  const Eigen::Vector4d r = mc_.mu + factor_ * z;
  return {cplx(r(0), r(1)), cplx(r(2), r(3))};
}

std::vector<FieldSample> sample_fields(const SamplerConfig& cfg) {
  check_config(cfg);
  const FieldSampler sampler(cfg.params);
  std::vector<FieldSample> out(cfg.n_samples);
  parallel_blocks(cfg.n_samples, cfg.n_workers, [&](std::uint64_t lo, std::uint64_t hi, int) {
    for (std::uint64_t i = lo; i < hi; ++i) {
      SplitMix64 rng = sample_rng(cfg.seed, i);
      out[i] = sampler(rng);
    }
  });
  return out;
}

std::pair<std::uint64_t, std::uint64_t> sample_counts(const FieldSample& field, SplitMix64& rng) {
  const std::uint64_t n1 = poisson(std::norm(field.alpha), rng);
  const std::uint64_t n2 = poisson(std::norm(field.beta), rng);
  return {n1, n2};
}

std::uint64_t EmpiricalPND::row_sum(int N) const {
  std::uint64_t s = 0;
  for (int M = 0; M <= max_count; ++M) s += (*this)(N, M);
  return s;
}

std::uint64_t EmpiricalPND::col_sum(int M) const {
  std::uint64_t s = 0;
  for (int N = 0; N <= max_count; ++N) s += (*this)(N, M);
  return s;
}

EmpiricalPND empirical_pnd(const SamplerConfig& cfg) {
  check_config(cfg);
  const FieldSampler sampler(cfg.params);
  const auto side = static_cast<std::size_t>(cfg.max_count) + 1;
  const auto max_count = static_cast<std::uint64_t>(cfg.max_count);
  std::vector<EmpiricalPND> parts(static_cast<std::size_t>(cfg.n_workers));
  for (auto& part : parts) part.counts.assign(side * side, 0);

  parallel_blocks(cfg.n_samples, cfg.n_workers, [&](std::uint64_t lo, std::uint64_t hi, int worker) {
    EmpiricalPND& e = parts[static_cast<std::size_t>(worker)];
    for (std::uint64_t i = lo; i < hi; ++i) {
      SplitMix64 rng = sample_rng(cfg.seed, i);
      const auto [n1, n2] = sample_counts(sampler(rng), rng);
      if (n1 > max_count || n2 > max_count) {
        ++e.overflow_count;
      } else {
        ++e.counts[n1 * side + n2];
      }
      e.sum_n1 += n1;
      e.sum_n2 += n2;
      e.sum_n1n2 += n1 * n2;
      e.sum_n1_sq += n1 * n1;
      e.sum_n2_sq += n2 * n2;
      e.sum_n1n2_sq += n1 * n2 * n1 * n2;
    }
  });

  // Integer merge: commutative, so the result is independent of the partition.
  EmpiricalPND out;
  out.params = cfg.params;
  out.max_count = cfg.max_count;
  out.seed = cfg.seed;
  out.total = cfg.n_samples;
  out.counts.assign(side * side, 0);
  for (const auto& part : parts) {
    for (std::size_t i = 0; i < out.counts.size(); ++i) out.counts[i] += part.counts[i];
    out.overflow_count += part.overflow_count;
    out.sum_n1 += part.sum_n1;
    out.sum_n2 += part.sum_n2;
    out.sum_n1n2 += part.sum_n1n2;
    out.sum_n1_sq += part.sum_n1_sq;
    out.sum_n2_sq += part.sum_n2_sq;
    out.sum_n1n2_sq += part.sum_n1n2_sq;
  }
  return out;
}

G2Estimate empirical_g2(const EmpiricalPND& e, int N, int M) {
  if (N < 0 || M < 0 || N > e.max_count || M > e.max_count)
    throw DomainError("empirical_g2: photon numbers outside the count matrix");
  const auto n = static_cast<double>(e.total);
  const auto row = static_cast<double>(e.row_sum(N));
  const auto col = static_cast<double>(e.col_sum(M));
  const auto cell = static_cast<double>(e(N, M));
  G2Estimate out;
  out.reliable = row >= 100.0 && col >= 100.0;
  if (row == 0.0 || col == 0.0) {
    out.estimate = std::numeric_limits<double>::quiet_NaN();
    out.std_error = std::numeric_limits<double>::infinity();
    return out;
  }
  out.estimate = cell * n / (row * col);
  if (cell == 0.0) {
    out.std_error = std::numeric_limits<double>::infinity();
    return out;
  }
  const double p = cell / n, r = row / n, c = col / n;
  // Delta method on log g for multinomial cell, row and column proportions.
  const double var_log = std::max(0.0, (1.0 / p - 1.0 / r - 1.0 / c + 2.0 * p / (r * c) - 1.0) / n);
  out.std_error = out.estimate * std::sqrt(var_log);
  return out;
}

CompareReport compare(const JointPND& analytic, const EmpiricalPND& empirical, const CompareOptions& opts) {
  if (!(analytic.params == empirical.params)) throw ParameterMismatchError("compare: analytic and empirical params differ");
  if (empirical.total == 0) throw DomainError("compare: empirical distribution is empty");
  CompareReport rep;
  const auto n = static_cast<double>(empirical.total);
  const int bound = std::min(analytic.n_max, empirical.max_count);
  double inside_p = 0.0, inside_f = 0.0, tv = 0.0;
  for (int N = 0; N <= bound; ++N) {
    for (int M = 0; M <= bound; ++M) {
      const double p = analytic(N, M);
      const std::uint64_t obs = empirical(N, M);
      const double f = static_cast<double>(obs) / n;
      inside_p += p;
      inside_f += f;
      tv += std::abs(p - f);
      const double expected = n * p;
      if (expected < opts.min_expected) continue;
      CellCheck cell{N, M, expected, obs, 0.0};
      cell.z = (static_cast<double>(obs) - expected) / std::sqrt(expected * (1.0 - p));
      rep.cells.push_back(cell);
      rep.max_abs_z = std::max(rep.max_abs_z, std::abs(cell.z));
      if (std::abs(cell.z) > opts.z_threshold) rep.failing.push_back(cell);
    }
  }
  // One extra bin for everything outside the compared square.
  tv += std::abs((1.0 - inside_p) - (1.0 - inside_f));
  rep.tv_distance = 0.5 * tv;
  rep.qualifying = rep.cells.size();
  rep.failing_fraction =
      rep.qualifying == 0 ? 0.0 : static_cast<double>(rep.failing.size()) / static_cast<double>(rep.qualifying);
  rep.pass = rep.qualifying > 0 && rep.failing_fraction <= opts.max_failing_fraction &&
             (!opts.tv_threshold || rep.tv_distance < *opts.tv_threshold);
  return rep;
}

}  // namespace qgs
