#pragma once

// Serialization of scan rows, joint distributions and validation reports.

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "qgs/fock_stats.hpp"
#include "qgs/scan.hpp"

namespace qgs {

inline constexpr const char* kCsvHeader = "separation,N,M,g2_tilde,log2_g2_tilde,classical_g2,tail_mass,flags";

/// %.17g formatting; non-finite values become the empty string.
std::string format_real(double v);

void write_csv(const std::vector<ScanRow>& rows, std::ostream& out);

/// {"metadata": metadata, "rows": [...]}; an undefined log is null.
nlohmann::json rows_to_json(const std::vector<ScanRow>& rows, const nlohmann::json& metadata);
std::vector<ScanRow> rows_from_json(const nlohmann::json& j);

/// Writes rows to path (or stdout for "" or "-"). Throws std::runtime_error
/// with the path on I/O failure; rows must be nonempty.
void emit(const std::vector<ScanRow>& rows, OutputFormat format, const std::string& path,
          const nlohmann::json& metadata = nlohmann::json::object());

nlohmann::json scan_metadata(const ScanConfig& cfg);

void write_pnd_csv(const JointPND& pnd, std::ostream& out);
nlohmann::json pnd_to_json(const JointPND& pnd);

nlohmann::json validation_to_json(const ValidationReport& rep);
void write_validation_text(const ValidationReport& rep, std::ostream& out);

}  // namespace qgs
