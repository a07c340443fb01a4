// qgs: separation scans, Monte Carlo validation, g²(0) fitting and joint
// distribution dumps for the two-detector partially coherent beam model.
//
// Exit status: 0 ok, 1 validation failed, 2 configuration error,
// 3 numerical certification failure.

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>

#include "qgs/config.hpp"
#include "qgs/emit.hpp"
#include "qgs/errors.hpp"
#include "qgs/fock_stats.hpp"
#include "qgs/scan.hpp"

namespace {

using nlohmann::json;

enum Exit { kOk = 0, kValidationFailed = 1, kConfigError = 2, kNumericalError = 3 };

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(item);
  return out;
}

double to_real(const std::string& s, const std::string& what) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos == s.size()) return v;
  } catch (const std::exception&) {
  }
  throw qgs::ConfigError(what + ": '" + s + "' is not a number");
}

int to_int(const std::string& s, const std::string& what) {
  try {
    std::size_t pos = 0;
    const int v = std::stoi(s, &pos);
    if (pos == s.size()) return v;
  } catch (const std::exception&) {
  }
  throw qgs::ConfigError(what + ": '" + s + "' is not an integer");
}

// Flags named after config keys. Values are kept as text and converted into
// a JSON patch so flags and files share one validation path.
struct Overrides {
  std::map<std::string, std::string> values;
  std::string config_path;

  void attach(CLI::App* app) {
    app->add_option("--config", config_path, "JSON config file (docs/config.md)");
    for (const char* key : {"n_peak", "mu_peak", "sigma0", "sigma1", "fit_g2", "fixed_position", "scan_min",
                            "scan_max", "steps", "pairs", "n_max", "tail_tolerance", "hard_cap", "marginal_floor",
                            "workers", "output_format", "output_path", "samples", "seed", "mc_workers",
                            "max_count", "separations", "tv_threshold"}) {
      std::string names = std::string("--") + key;
      if (std::string(key) == "output_format") names += ",--format";
      if (std::string(key) == "output_path") names += ",--out";
      app->add_option_function<std::string>(
          names, [this, k = std::string(key)](const std::string& v) { values[k] = v; }, "overrides config key");
    }
  }

  json patch() const {
    json top = json::object();
    json mc = json::object();
    for (const auto& [key, v] : values) {
      if (key == "mu_peak") {
        const auto parts = split(v, ',');
        if (parts.size() == 1) {
          top[key] = to_real(parts[0], key);
        } else if (parts.size() == 2) {
          top[key] = {to_real(parts[0], key), to_real(parts[1], key)};
        } else {
          throw qgs::ConfigError("mu_peak: expected 're' or 're,im'");
        }
      } else if (key == "fit_g2") {
        top[key] = (v == "none" || v == "null") ? json(nullptr) : json(to_real(v, key));
      } else if (key == "pairs") {
        json arr = json::array();
        for (const auto& pair : split(v, ';')) {
          const auto nm = split(pair, ',');
          if (nm.size() != 2) throw qgs::ConfigError("pairs: expected 'N,M;N,M;...'");
          arr.push_back({to_int(nm[0], key), to_int(nm[1], key)});
        }
        top[key] = arr;
      } else if (key == "separations") {
        json arr = json::array();
        for (const auto& s : split(v, ',')) arr.push_back(to_real(s, key));
        mc[key] = arr;
      } else if (key == "samples" || key == "seed") {
        try {
          std::size_t pos = 0;
          const unsigned long long u = std::stoull(v, &pos);
          if (pos != v.size() || v.find('-') != std::string::npos) throw std::invalid_argument(v);
          mc[key] = static_cast<std::uint64_t>(u);
        } catch (const std::exception&) {
          throw qgs::ConfigError(key + ": '" + v + "' is not a nonnegative integer");
        }
      } else if (key == "mc_workers") {
        mc["workers"] = to_int(v, key);
      } else if (key == "max_count") {
        mc[key] = to_int(v, key);
      } else if (key == "tv_threshold") {
        mc[key] = (v == "none" || v == "null") ? json(nullptr) : json(to_real(v, key));
      } else if (key == "steps" || key == "n_max" || key == "hard_cap" || key == "workers") {
        top[key] = to_int(v, key);
      } else if (key == "output_format" || key == "output_path") {
        top[key] = v;
      } else {
        top[key] = to_real(v, key);
      }
    }
    if (!mc.empty()) top["mc"] = mc;
    return top;
  }

  qgs::ScanConfig resolve() const {
    qgs::ScanConfig cfg = config_path.empty() ? qgs::default_scan_config() : qgs::load_config(config_path);
    if (const char* env = std::getenv("QGS_WORKERS")) {
      const int w = to_int(env, "QGS_WORKERS");
      if (w < 1) throw qgs::ConfigError("QGS_WORKERS must be a positive integer");
      cfg.workers = w;
      cfg.mc.workers = w;
    }
    cfg = qgs::config_from_json(patch(), cfg);
    qgs::validate(cfg);
    return cfg;
  }
};

int cmd_scan(const Overrides& o) {
  const qgs::ScanConfig cfg = o.resolve();
  const auto rows = qgs::run_scan(cfg);
  qgs::emit(rows, cfg.output_format, cfg.output_path, qgs::scan_metadata(cfg));
  if (qgs::has_hard_failure(rows)) {
    std::cerr << "qgs scan: some rows failed numerical certification\n";
    return kNumericalError;
  }
  return kOk;
}

int cmd_validate(const Overrides& o, const std::string& perturb, const std::string& report_path) {
  const qgs::ScanConfig cfg = o.resolve();
  std::optional<qgs::CellPerturbation> cell;
  if (!perturb.empty()) {
    const auto parts = split(perturb, ',');
    if (parts.size() != 3) throw qgs::ConfigError("--perturb-cell: expected N,M,delta");
    cell = qgs::CellPerturbation{to_int(parts[0], "perturb-cell"), to_int(parts[1], "perturb-cell"),
                                 to_real(parts[2], "perturb-cell")};
  }
  const qgs::ValidationReport rep = qgs::run_validation(cfg, cell);
  qgs::write_validation_text(rep, std::cout);
  if (!report_path.empty()) {
    std::ofstream out(report_path);
    if (!out) throw std::runtime_error("cannot open report file '" + report_path + "'");
    out << qgs::validation_to_json(rep).dump(2) << '\n';
    if (!out) throw std::runtime_error("write failed for report file '" + report_path + "'");
  }
  return rep.pass ? kOk : kValidationFailed;
}

int cmd_fit(const Overrides& o, double target) {
  const qgs::ScanConfig cfg = o.resolve();
  const qgs::BeamProfile fitted = qgs::fit_g2_zero(target, cfg.profile);
  const qgs::TwoPointParams p = qgs::two_point_params(fitted, cfg.fixed_position, cfg.fixed_position);
  const qgs::JointPND pnd = qgs::joint_pnd(p, cfg.n_max, {std::min(cfg.tail_tolerance, 1e-12), cfg.hard_cap});
  const json out = {{"target", target},
                    {"thermal_fraction", qgs::thermal_fraction_for_g2(target)},
                    {"n_peak", fitted.n_peak},
                    {"mu_peak", {fitted.mu_peak.real(), fitted.mu_peak.imag()}},
                    {"classical_g2_pnd", qgs::classical_g2(pnd)},
                    {"classical_g2_gaussian", qgs::classical_g2_gaussian(p)}};
  std::cout << out.dump(2) << '\n';
  return kOk;
}

int cmd_pnd(const Overrides& o, double separation) {
  const qgs::ScanConfig cfg = o.resolve();
  const qgs::BeamProfile profile = qgs::effective_profile(cfg);
  const qgs::TwoPointParams p = qgs::two_point_params(profile, cfg.fixed_position, cfg.fixed_position + separation);
  const qgs::JointPND pnd = qgs::joint_pnd(p, cfg.n_max, {cfg.tail_tolerance, cfg.hard_cap});
  std::ofstream file;
  const bool to_stdout = cfg.output_path.empty() || cfg.output_path == "-";
  if (!to_stdout) {
    file.open(cfg.output_path);
    if (!file) throw std::runtime_error("cannot open output file '" + cfg.output_path + "'");
  }
  std::ostream& out = to_stdout ? std::cout : file;
  if (cfg.output_format == qgs::OutputFormat::csv) {
    qgs::write_pnd_csv(pnd, out);
  } else {
    out << qgs::pnd_to_json(pnd).dump(2) << '\n';
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Photon statistics of a partially coherent beam at two detectors"};
  app.require_subcommand(1);

  Overrides scan_o, validate_o, fit_o, pnd_o;
  CLI::App* scan = app.add_subcommand("scan", "Scan detector separation and write g2 curves");
  scan_o.attach(scan);

  CLI::App* validate = app.add_subcommand("validate", "Compare analytic and Monte Carlo distributions");
  validate_o.attach(validate);
  std::string perturb;
  std::string report_path = "validation.json";
  validate->add_option("--perturb-cell", perturb, "Test hook: add delta to analytic p(N,M), as N,M,delta");
  validate->add_option("--report", report_path, "Machine-readable report path (empty to skip)");

  CLI::App* fit = app.add_subcommand("fit-g2", "Fit n_peak to a classical g2(0) target");
  fit_o.attach(fit);
  double target = 1.7;
  fit->add_option("--target", target, "Target classical g2(0) in (1, 2)");

  CLI::App* pnd = app.add_subcommand("pnd", "Dump the joint photon-number distribution at one separation");
  pnd_o.attach(pnd);
  double separation = 0.0;
  pnd->add_option("--separation", separation, "Detector separation");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (*scan) return cmd_scan(scan_o);
    if (*validate) return cmd_validate(validate_o, perturb, report_path);
    if (*fit) return cmd_fit(fit_o, target);
    if (*pnd) return cmd_pnd(pnd_o, separation);
  } catch (const qgs::ConfigError& e) {
    std::cerr << "qgs: configuration error: " << e.what() << '\n';
    return kConfigError;
  } catch (const qgs::DomainError& e) {
    std::cerr << "qgs: invalid parameters: " << e.what() << '\n';
    return kConfigError;
  } catch (const qgs::NumericalError& e) {
    std::cerr << "qgs: numerical failure: " << e.what() << '\n';
    return kNumericalError;
  } catch (const std::exception& e) {
    std::cerr << "qgs: " << e.what() << '\n';
    return kConfigError;
  }
  return kConfigError;
}
