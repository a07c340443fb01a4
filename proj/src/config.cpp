#include "qgs/config.hpp"

#include <fstream>
#include <set>

#include "qgs/errors.hpp"

namespace qgs {

namespace {

using nlohmann::json;

template <class T>
T get(const json& j, const std::string& key) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError("config key '" + key + "': " + e.what());
  }
}

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be a JSON object");
  for (const auto& [key, value] : j.items())
    if (!allowed.count(key)) throw ConfigError("unknown config key '" + where + key + "'");
}

cplx parse_complex(const json& j, const std::string& key) {
  const json& v = j.at(key);
  if (v.is_number()) return {v.get<double>(), 0.0};
  if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number())
    return {v[0].get<double>(), v[1].get<double>()};
  throw ConfigError("config key '" + key + "': expected a number or [re, im]");
}

}  // namespace

OutputFormat parse_output_format(const std::string& s) {
  if (s == "csv") return OutputFormat::csv;
  if (s == "json") return OutputFormat::json;
  throw ConfigError("output_format must be 'csv' or 'json', got '" + s + "'");
}

std::string to_string(OutputFormat f) { return f == OutputFormat::csv ? "csv" : "json"; }

ScanConfig config_from_json(const json& j, ScanConfig cfg) {
  check_keys(j,
             {"n_peak", "mu_peak", "sigma0", "sigma1", "fit_g2", "fixed_position", "scan_min", "scan_max", "steps",
              "pairs", "n_max", "tail_tolerance", "hard_cap", "marginal_floor", "workers", "output_format",
              "output_path", "mc"},
             "");
  if (j.contains("n_peak")) {
    cfg.profile.n_peak = get<double>(j, "n_peak");
    if (!j.contains("fit_g2")) cfg.fit_g2.reset();  // an explicit n_peak wins over the default fit
  }
  if (j.contains("mu_peak")) cfg.profile.mu_peak = parse_complex(j, "mu_peak");
  if (j.contains("sigma0")) cfg.profile.sigma0 = get<double>(j, "sigma0");
  if (j.contains("sigma1")) cfg.profile.sigma1 = get<double>(j, "sigma1");
  if (j.contains("fit_g2")) {
    if (j.at("fit_g2").is_null()) {
      cfg.fit_g2.reset();
    } else {
      cfg.fit_g2 = get<double>(j, "fit_g2");
    }
  }
  if (j.contains("fixed_position")) cfg.fixed_position = get<double>(j, "fixed_position");
  if (j.contains("scan_min")) cfg.scan_min = get<double>(j, "scan_min");
  if (j.contains("scan_max")) cfg.scan_max = get<double>(j, "scan_max");
  if (j.contains("steps")) cfg.steps = get<int>(j, "steps");
  if (j.contains("pairs")) {
    cfg.pairs.clear();
    const json& pairs = j.at("pairs");
    if (!pairs.is_array()) throw ConfigError("config key 'pairs': expected an array of [N, M]");
    for (const json& p : pairs) {
      if (!p.is_array() || p.size() != 2 || !p[0].is_number_integer() || !p[1].is_number_integer())
        throw ConfigError("config key 'pairs': expected an array of [N, M]");
      cfg.pairs.emplace_back(p[0].get<int>(), p[1].get<int>());
    }
  }
  if (j.contains("n_max")) cfg.n_max = get<int>(j, "n_max");
  if (j.contains("tail_tolerance")) cfg.tail_tolerance = get<double>(j, "tail_tolerance");
  if (j.contains("hard_cap")) cfg.hard_cap = get<int>(j, "hard_cap");
  if (j.contains("marginal_floor")) cfg.marginal_floor = get<double>(j, "marginal_floor");
  if (j.contains("workers")) cfg.workers = get<int>(j, "workers");
  if (j.contains("output_format")) cfg.output_format = parse_output_format(get<std::string>(j, "output_format"));
  if (j.contains("output_path")) cfg.output_path = get<std::string>(j, "output_path");
  if (j.contains("mc")) {
    const json& mc = j.at("mc");
    check_keys(mc, {"samples", "seed", "workers", "max_count", "separations", "tv_threshold"}, "mc.");
    if (mc.contains("samples")) cfg.mc.samples = get<std::uint64_t>(mc, "samples");
    if (mc.contains("seed")) cfg.mc.seed = get<std::uint64_t>(mc, "seed");
    if (mc.contains("workers")) cfg.mc.workers = get<int>(mc, "workers");
    if (mc.contains("max_count")) cfg.mc.max_count = get<int>(mc, "max_count");
    if (mc.contains("separations")) cfg.mc.separations = get<std::vector<double>>(mc, "separations");
    if (mc.contains("tv_threshold")) {
      if (mc.at("tv_threshold").is_null())
        cfg.mc.tv_threshold.reset();
      else
        cfg.mc.tv_threshold = get<double>(mc, "tv_threshold");
    }
  }
  return cfg;
}

ScanConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("config file '" + path + "': " + e.what());
  }
  try {
    return config_from_json(j);
  } catch (const ConfigError& e) {
    throw ConfigError("config file '" + path + "': " + e.what());
  }
}

json config_to_json(const ScanConfig& cfg) {
  json pairs = json::array();
  for (const auto& [N, M] : cfg.pairs) pairs.push_back({N, M});
  json j = {
      {"n_peak", cfg.profile.n_peak},
      {"mu_peak", {cfg.profile.mu_peak.real(), cfg.profile.mu_peak.imag()}},
      {"sigma0", cfg.profile.sigma0},
      {"sigma1", cfg.profile.sigma1},
      {"fit_g2", cfg.fit_g2 ? json(*cfg.fit_g2) : json(nullptr)},
      {"fixed_position", cfg.fixed_position},
      {"scan_min", cfg.scan_min},
      {"scan_max", cfg.scan_max},
      {"steps", cfg.steps},
      {"pairs", pairs},
      {"n_max", cfg.n_max},
      {"tail_tolerance", cfg.tail_tolerance},
      {"hard_cap", cfg.hard_cap},
      {"marginal_floor", cfg.marginal_floor},
      {"workers", cfg.workers},
      {"output_format", to_string(cfg.output_format)},
      {"output_path", cfg.output_path},
      {"mc",
       {{"samples", cfg.mc.samples},
        {"seed", cfg.mc.seed},
        {"workers", cfg.mc.workers},
        {"max_count", cfg.mc.max_count},
        {"separations", cfg.mc.separations},
        {"tv_threshold", cfg.mc.tv_threshold ? json(*cfg.mc.tv_threshold) : json(nullptr)}}},
  };
  return j;
}

}  // namespace qgs
