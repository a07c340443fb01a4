#include "qgs/scan.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <sstream>
#include <thread>

#include "qgs/errors.hpp"

namespace qgs {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError(what);
}

std::vector<ScanRow> rows_at(const ScanConfig& cfg, const BeamProfile& profile, double separation) {
  const double s2 = cfg.fixed_position + separation;
  const TwoPointParams p = two_point_params(profile, cfg.fixed_position, s2);
  std::vector<ScanRow> rows;
  for (const auto& [N, M] : cfg.pairs) {
    ScanRow r;
    r.separation = separation;
    r.N = N;
    r.M = M;
    r.g2_tilde = std::numeric_limits<double>::quiet_NaN();
    r.classical_g2 = classical_g2_gaussian(p);
    rows.push_back(r);
  }
  JointPND pnd;
  try {
    pnd = joint_pnd(p, cfg.n_max, {cfg.tail_tolerance, cfg.hard_cap});
  } catch (const NumericalError&) {
    for (auto& r : rows) r.flags.emplace_back(flag::kCertificationFailed);
    return rows;
  }
  std::optional<double> classical;
  if (pnd.tail_met) {
    try {
      classical = classical_g2(pnd);
    } catch (const TruncationError&) {
    }
  }
  for (auto& r : rows) {
    r.tail_mass = pnd.tail_mass;
    if (classical) {
      r.classical_g2 = *classical;
    } else {
      r.flags.emplace_back(flag::kTailUnmet);
    }
    try {
      r.g2_tilde = wavepacket_g2(pnd, r.N, r.M, cfg.marginal_floor);
    } catch (const UnderflowError&) {
      r.flags.emplace_back(flag::kMarginalUnderflow);
    }
    if (r.g2_tilde > 0.0) {
      r.log2_g2_tilde = std::log2(r.g2_tilde);
    } else {
      r.flags.emplace_back(flag::kLogUndefined);
    }
  }
  return rows;
}

}  // namespace

ScanConfig default_scan_config() {
  ScanConfig cfg;
  cfg.profile.mu_peak = {1.0, 0.0};
  cfg.profile.sigma0 = 4.0;
  cfg.profile.sigma1 = 1.0;
  cfg.fit_g2 = 1.7;
  cfg.profile = fit_g2_zero(*cfg.fit_g2, cfg.profile);
  cfg.pairs = {{0, 0}, {1, 1}, {5, 5}, {8, 8}, {16, 16}, {5, 1}, {8, 1}, {16, 1}};
  return cfg;
}

void validate(const ScanConfig& cfg) {
  require(cfg.profile.sigma0 > 0.0, "sigma0 must be positive");
  require(cfg.profile.sigma1 > 0.0, "sigma1 must be positive");
  if (cfg.fit_g2) {
    require(*cfg.fit_g2 > 1.0 && *cfg.fit_g2 < 2.0, "fit_g2 must lie strictly between 1 and 2");
    require(std::abs(cfg.profile.mu_peak) > 0.0, "fit_g2 requires a nonzero mu_peak");
  } else {
    require(cfg.profile.n_peak > 0.0, "n_peak must be positive");
  }
  require(std::isfinite(cfg.fixed_position), "fixed_position must be finite");
  require(cfg.scan_min < cfg.scan_max, "scan_min must be below scan_max");
  require(cfg.steps >= 2, "steps must be at least 2");
  require(!cfg.pairs.empty(), "pairs must not be empty");
  require(cfg.n_max >= 0, "n_max must be nonnegative");
  require(cfg.hard_cap >= cfg.n_max && cfg.hard_cap <= kDefaultMaxOrder, "hard_cap must lie in [n_max, 64]");
  for (const auto& [N, M] : cfg.pairs)
    require(N >= 0 && M >= 0 && N <= cfg.n_max && M <= cfg.n_max, "pair indices must lie in [0, n_max]");
  require(cfg.tail_tolerance > 0.0, "tail_tolerance must be positive");
  require(cfg.marginal_floor > 0.0, "marginal_floor must be positive");
  require(cfg.workers >= 1, "workers must be at least 1");
  require(cfg.mc.samples >= 1, "samples must be at least 1");
  require(cfg.mc.workers >= 1, "mc workers must be at least 1");
  require(cfg.mc.max_count >= cfg.n_max, "max_count must be at least n_max");
  require(!cfg.mc.tv_threshold || *cfg.mc.tv_threshold > 0.0, "tv_threshold must be positive");
}

BeamProfile effective_profile(const ScanConfig& cfg) {
  return cfg.fit_g2 ? fit_g2_zero(*cfg.fit_g2, cfg.profile) : cfg.profile;
}

std::vector<double> scan_separations(const ScanConfig& cfg) {
  std::vector<double> out(static_cast<std::size_t>(cfg.steps));
  for (int i = 0; i < cfg.steps; ++i)
    out[i] = i == cfg.steps - 1 ? cfg.scan_max : cfg.scan_min + (cfg.scan_max - cfg.scan_min) * i / (cfg.steps - 1);
  return out;
}

bool ScanRow::has_flag(const std::string& f) const { return std::find(flags.begin(), flags.end(), f) != flags.end(); }

std::vector<ScanRow> run_scan(const ScanConfig& cfg) {
  validate(cfg);
  const BeamProfile profile = effective_profile(cfg);
  validate(profile);
  const std::vector<double> seps = scan_separations(cfg);
  std::vector<std::vector<ScanRow>> by_position(seps.size());
  std::atomic<std::size_t> next{0};
  const auto work = [&] {
    for (std::size_t i = next++; i < seps.size(); i = next++) by_position[i] = rows_at(cfg, profile, seps[i]);
  };
  const int workers = std::min<int>(cfg.workers, static_cast<int>(seps.size()));
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  std::vector<ScanRow> rows;
  for (auto& block : by_position) rows.insert(rows.end(), block.begin(), block.end());
  return rows;
}

bool has_hard_failure(const std::vector<ScanRow>& rows) {
  return std::any_of(rows.begin(), rows.end(), [](const ScanRow& r) { return r.has_flag(flag::kCertificationFailed); });
}

double thermal_fraction_for_g2(double target) {
  if (!(target >= 1.0 && target <= 2.0)) throw DomainError("thermal_fraction_for_g2: target must lie in [1, 2]");
  // 1 + 2f - f² is increasing on [0, 1].
  double lo = 0.0, hi = 1.0;
  while (hi - lo > 1e-10) {
    const double mid = 0.5 * (lo + hi);
    if (1.0 + 2.0 * mid - mid * mid < target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  if (target == 1.0) return 0.0;
  if (target == 2.0) return 1.0;
  return 0.5 * (lo + hi);
}

BeamProfile fit_g2_zero(double target, const BeamProfile& profile) {
  if (!(target > 1.0 && target < 2.0)) throw DomainError("fit_g2_zero: target must lie strictly between 1 and 2");
  const double m2 = std::norm(profile.mu_peak);
  if (!(m2 > 0.0)) throw DomainError("fit_g2_zero: mu_peak must be nonzero");
  const double f = thermal_fraction_for_g2(target);
  BeamProfile out = profile;
  out.n_peak = f / (1.0 - f) * m2;
  return out;
}

ValidationReport run_validation(const ScanConfig& cfg, const std::optional<CellPerturbation>& perturb) {
  validate(cfg);
  const BeamProfile profile = effective_profile(cfg);
  validate(profile);
  std::vector<double> seps = cfg.mc.separations;
  if (seps.empty()) seps = {cfg.scan_min, 0.5 * (cfg.scan_min + cfg.scan_max), cfg.scan_max};
  ValidationReport rep;
  rep.samples = cfg.mc.samples;
  rep.seed = cfg.mc.seed;
  rep.pass = true;
  CompareOptions opts;
  opts.tv_threshold = cfg.mc.tv_threshold;
  for (std::size_t i = 0; i < seps.size(); ++i) {
    const double sep = seps[i];
    ValidationPoint pt;
    pt.separation = sep;
    pt.params = two_point_params(profile, cfg.fixed_position, cfg.fixed_position + sep);
    JointPND pnd = joint_pnd(pt.params, cfg.n_max, {cfg.tail_tolerance, cfg.hard_cap});
    if (perturb) {
      if (perturb->N < 0 || perturb->M < 0 || perturb->N > pnd.n_max || perturb->M > pnd.n_max)
        throw ConfigError("perturb-cell indices outside the computed distribution");
      pnd.p[static_cast<std::size_t>(perturb->N) * (pnd.n_max + 1) + perturb->M] += perturb->delta;
    }
    SamplerConfig sc;
    sc.params = pt.params;
    sc.n_samples = cfg.mc.samples;
    sc.seed = cfg.mc.seed + i;  // distinct streams per separation
    sc.n_workers = cfg.mc.workers;
    sc.max_count = cfg.mc.max_count;
    const EmpiricalPND emp = empirical_pnd(sc);
    pt.tail_mass = pnd.tail_mass;
    pt.overflow_count = emp.overflow_count;
    pt.report = compare(pnd, emp, opts);
    rep.pass = rep.pass && pt.report.pass;
    rep.points.push_back(std::move(pt));
  }
  return rep;
}

}  // namespace qgs
