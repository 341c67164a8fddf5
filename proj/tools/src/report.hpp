#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

namespace lognnet::cli {

inline constexpr int kReportSchemaVersion = 1;

/// Six significant digits, returned as the nearest double so JSON output
/// stays short ("99.509", not "99.50900000000001").
double round6(double v);

/// Applies round6 to every floating-point number in `j`.
nlohmann::json round_floats(const nlohmann::json& j);

/// FNV-1a over the manifest with its output directory left out, as 16 hex
/// digits. Identical runs written to different directories share a name.
std::string manifest_hash(const nlohmann::json& manifest);

/// {"schema_version", "command", "manifest", "result"} with floats rounded.
nlohmann::json make_report(const nlohmann::json& manifest, const nlohmann::json& result);

/// Base name shared by a run's report and its side files:
/// "<command>-<manifest hash>".
std::string report_stem(const nlohmann::json& manifest);

/// Creates `dir` if needed and writes `text` to dir/name. Returns the path.
std::filesystem::path write_output(const std::filesystem::path& dir, const std::string& name,
                                   const std::string& text);

}  // namespace lognnet::cli
