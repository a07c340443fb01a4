#include "qgs/emit.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <stdexcept>

#include "qgs/config.hpp"

#ifndef QGS_VERSION
#define QGS_VERSION "unknown"
#endif

namespace qgs {

using nlohmann::json;

std::string format_real(double v) {
  if (!std::isfinite(v)) return "";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return {buf, res.ptr};
}

namespace {

std::string join_flags(const std::vector<std::string>& flags) {
  std::string s;
  for (std::size_t i = 0; i < flags.size(); ++i) {
    if (i) s += ';';
    s += flags[i];
  }
  return s;
}

json real_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

double real_from(const json& v) {
  return v.is_null() ? std::numeric_limits<double>::quiet_NaN() : v.get<double>();
}

}  // namespace

void write_csv(const std::vector<ScanRow>& rows, std::ostream& out) {
  out << kCsvHeader << '\n';
  for (const ScanRow& r : rows) {
    out << format_real(r.separation) << ',' << r.N << ',' << r.M << ',' << format_real(r.g2_tilde) << ','
        << (r.log2_g2_tilde ? format_real(*r.log2_g2_tilde) : std::string()) << ',' << format_real(r.classical_g2)
        << ',' << format_real(r.tail_mass) << ',' << join_flags(r.flags) << '\n';
  }
}

json rows_to_json(const std::vector<ScanRow>& rows, const json& metadata) {
  json arr = json::array();
  for (const ScanRow& r : rows) {
    arr.push_back({{"separation", r.separation},
                   {"N", r.N},
                   {"M", r.M},
                   {"g2_tilde", real_or_null(r.g2_tilde)},
                   {"log2_g2_tilde", r.log2_g2_tilde ? json(*r.log2_g2_tilde) : json(nullptr)},
                   {"classical_g2", real_or_null(r.classical_g2)},
                   {"tail_mass", real_or_null(r.tail_mass)},
                   {"flags", r.flags}});
  }
  return {{"metadata", metadata}, {"rows", arr}};
}

std::vector<ScanRow> rows_from_json(const json& j) {
  std::vector<ScanRow> rows;
  for (const json& o : j.at("rows")) {
    ScanRow r;
    r.separation = o.at("separation").get<double>();
    r.N = o.at("N").get<int>();
    r.M = o.at("M").get<int>();
    r.g2_tilde = real_from(o.at("g2_tilde"));
    if (!o.at("log2_g2_tilde").is_null()) r.log2_g2_tilde = o.at("log2_g2_tilde").get<double>();
    r.classical_g2 = real_from(o.at("classical_g2"));
    r.tail_mass = real_from(o.at("tail_mass"));
    r.flags = o.at("flags").get<std::vector<std::string>>();
    rows.push_back(std::move(r));
  }
  return rows;
}

void emit(const std::vector<ScanRow>& rows, OutputFormat format, const std::string& path, const json& metadata) {
  if (rows.empty()) throw std::invalid_argument("emit: no rows to write");
  const auto write = [&](std::ostream& out) {
    if (format == OutputFormat::csv) {
      write_csv(rows, out);
    } else {
      out << rows_to_json(rows, metadata).dump(2) << '\n';
    }
  };
  if (path.empty() || path == "-") {
    write(std::cout);
    std::cout.flush();
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open output file '" + path + "'");
  write(out);
  out.flush();
  if (!out) throw std::runtime_error("write failed for output file '" + path + "'");
}

json scan_metadata(const ScanConfig& cfg) {
  ScanConfig echo = cfg;
  echo.profile = effective_profile(cfg);
  json config = config_to_json(echo);
  // Thread counts never change results, so they stay out of the record.
  config.erase("workers");
  config["mc"].erase("workers");
  return {{"config", config}, {"seed", cfg.mc.seed}, {"version", QGS_VERSION}};
}

void write_pnd_csv(const JointPND& pnd, std::ostream& out) {
  out << "N,M,p\n";
  for (int N = 0; N <= pnd.n_max; ++N)
    for (int M = 0; M <= pnd.n_max; ++M) out << N << ',' << M << ',' << format_real(pnd(N, M)) << '\n';
}

json pnd_to_json(const JointPND& pnd) {
  json rows = json::array();
  for (int N = 0; N <= pnd.n_max; ++N) {
    json row = json::array();
    for (int M = 0; M <= pnd.n_max; ++M) row.push_back(pnd(N, M));
    rows.push_back(row);
  }
  const auto& p = pnd.params;
  return {{"params",
           {{"n1", p.n1}, {"n2", p.n2}, {"g", p.g}, {"mu1", {p.mu1.real(), p.mu1.imag()}},
            {"mu2", {p.mu2.real(), p.mu2.imag()}}}},
          {"n_max", pnd.n_max},
          {"tail_mass", pnd.tail_mass},
          {"tail_met", pnd.tail_met},
          {"p", rows},
          {"marginal1", pnd.marginal1},
          {"marginal2", pnd.marginal2}};
}

json validation_to_json(const ValidationReport& rep) {
  json points = json::array();
  for (const ValidationPoint& pt : rep.points) {
    json failing = json::array();
    for (const CellCheck& c : pt.report.failing)
      failing.push_back({{"N", c.N}, {"M", c.M}, {"expected", c.expected}, {"observed", c.observed}, {"z", c.z}});
    const auto& p = pt.params;
    points.push_back({{"separation", pt.separation},
                      {"params",
                       {{"n1", p.n1}, {"n2", p.n2}, {"g", p.g}, {"mu1", {p.mu1.real(), p.mu1.imag()}},
                        {"mu2", {p.mu2.real(), p.mu2.imag()}}}},
                      {"tail_mass", pt.tail_mass},
                      {"overflow_count", pt.overflow_count},
                      {"qualifying_cells", pt.report.qualifying},
                      {"failing_cells", pt.report.failing.size()},
                      {"failing_fraction", pt.report.failing_fraction},
                      {"max_abs_z", pt.report.max_abs_z},
                      {"tv_distance", pt.report.tv_distance},
                      {"failing", failing},
                      {"pass", pt.report.pass}});
  }
  return {{"samples", rep.samples}, {"seed", rep.seed}, {"version", QGS_VERSION}, {"points", points}, {"pass", rep.pass}};
}

void write_validation_text(const ValidationReport& rep, std::ostream& out) {
  out << "validation: " << rep.samples << " samples per separation, seed " << rep.seed << '\n';
  for (const ValidationPoint& pt : rep.points) {
    out << "  separation " << pt.separation << ": " << (pt.report.pass ? "pass" : "FAIL") << "  TV "
        << pt.report.tv_distance << ", " << pt.report.failing.size() << "/" << pt.report.qualifying
        << " cells beyond 4 sigma, max |z| " << pt.report.max_abs_z << '\n';
    for (const CellCheck& c : pt.report.failing)
      out << "    cell (" << c.N << "," << c.M << ") expected " << c.expected << " observed " << c.observed << " z "
          << c.z << '\n';
  }
  out << (rep.pass ? "PASS" : "FAIL") << '\n';
}

}  // namespace qgs
