#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "amm/calibrate.hpp"
#include "amm/core.hpp"

namespace amm::io {

inline constexpr int kReportFormatVersion = 1;

// Matrix text format:
//   # names: <name_1> ... <name_K>     (optional, before the header)
//   # any other comment                (optional, before the header)
//   N K
//   N lines of K space-separated values from {-1, 1}
AttributeMatrix parse_matrix(const std::string& text);
std::string format_matrix(const AttributeMatrix& m);

AttributeMatrix read_matrix(const std::filesystem::path& path);
void write_matrix(const AttributeMatrix& m, const std::filesystem::path& path);

nlohmann::ordered_json report_to_json(const MeaningfulnessReport& report);
MeaningfulnessReport report_from_json(const nlohmann::ordered_json& json);

void write_report(const MeaningfulnessReport& report, const std::filesystem::path& path);
MeaningfulnessReport read_report(const std::filesystem::path& path);

nlohmann::ordered_json config_to_json(const EvaluationConfig& config);
/// Missing keys keep their defaults; bad values raise InvalidConfig.
EvaluationConfig config_from_json(const nlohmann::ordered_json& json);

struct RunManifest {
  std::filesystem::path s_path;
  std::filesystem::path d_path;
  EvaluationConfig config;
};

/// Paths in the manifest resolve relative to the manifest's directory.
/// Errors: IoFailure (unreadable manifest or missing S/D file), ParseError,
/// InvalidConfig.
RunManifest read_manifest(const std::filesystem::path& path);

/// Writes `contents` to a sibling temp file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

}  // namespace amm::io
