#pragma once

// Detector-separation scans, validation runs against the Monte Carlo
// oracle, and the g²(0) operating-point fit.

#include <cfloat>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "qgs/fock_stats.hpp"
#include "qgs/mc_oracle.hpp"
#include "qgs/source_model.hpp"

namespace qgs {

enum class OutputFormat { csv, json };

struct McSettings {
  std::uint64_t samples = 1'000'000;
  std::uint64_t seed = 20240611;
  int workers = 1;
  int max_count = 64;
  std::vector<double> separations;  // empty: scan_min, midpoint, scan_max
  std::optional<double> tv_threshold;  // unset: verdict uses cell z-scores only
};

struct ScanConfig {
  BeamProfile profile;
  std::optional<double> fit_g2;  // when set, n_peak is derived by fit_g2_zero
  double fixed_position = 0.0;
  double scan_min = 0.0;
  double scan_max = 4.0;
  int steps = 81;
  std::vector<std::pair<int, int>> pairs;
  int n_max = 16;
  double tail_tolerance = 1e-10;
  int hard_cap = kDefaultMaxOrder;
  // Far-off-axis 16-photon marginals are ~1e-29 but still well defined.
  double marginal_floor = DBL_MIN;
  int workers = 1;
  McSettings mc;
  OutputFormat output_format = OutputFormat::csv;
  std::string output_path;
};

/// mu_peak = 1, n_peak fitted to classical g²(0) = 1.7, σ₀ = 4, σ₁ = 1,
/// separations [0, 4] in 81 steps, eight (N, M) pairs up to 16 photons.
ScanConfig default_scan_config();

/// Throws ConfigError describing the first violated constraint.
void validate(const ScanConfig& cfg);

/// The profile actually used: cfg.profile with n_peak refitted if fit_g2 is set.
BeamProfile effective_profile(const ScanConfig& cfg);

std::vector<double> scan_separations(const ScanConfig& cfg);

namespace flag {
inline constexpr const char* kLogUndefined = "log-undefined";
inline constexpr const char* kTailUnmet = "tail-unmet";
inline constexpr const char* kMarginalUnderflow = "marginal-underflow";
inline constexpr const char* kCertificationFailed = "certification-failed";
}  // namespace flag

struct ScanRow {
  double separation = 0.0;
  int N = 0;
  int M = 0;
  double g2_tilde = 0.0;  // NaN when undefined
  std::optional<double> log2_g2_tilde;
  double classical_g2 = 0.0;
  double tail_mass = 0.0;
  std::vector<std::string> flags;

  bool has_flag(const std::string& f) const;
  friend bool operator==(const ScanRow&, const ScanRow&) = default;
};

/// Rows ordered by separation, then by configured pair order. Positions are
/// evaluated on cfg.workers threads; the output does not depend on it.
std::vector<ScanRow> run_scan(const ScanConfig& cfg);

/// True if any row carries the certification-failed flag.
bool has_hard_failure(const std::vector<ScanRow>& rows);

/// f in [0, 1] with 1 + 2f - f² = target, by bisection to 1e-10.
/// Throws DomainError for target outside [1, 2].
double thermal_fraction_for_g2(double target);

/// Profile with n_peak = f/(1-f) |mu_peak|² for the f above.
/// Throws DomainError unless 1 < target < 2 and mu_peak != 0.
BeamProfile fit_g2_zero(double target, const BeamProfile& profile);

struct CellPerturbation {
  int N = 0;
  int M = 0;
  double delta = 0.0;  // added to the analytic p(N, M) before comparison
};

struct ValidationPoint {
  double separation = 0.0;
  TwoPointParams params;
  double tail_mass = 0.0;
  std::uint64_t overflow_count = 0;
  CompareReport report;
};

struct ValidationReport {
  std::vector<ValidationPoint> points;
  std::uint64_t samples = 0;
  std::uint64_t seed = 0;
  bool pass = false;
};

ValidationReport run_validation(const ScanConfig& cfg, const std::optional<CellPerturbation>& perturb = std::nullopt);

}  // namespace qgs
