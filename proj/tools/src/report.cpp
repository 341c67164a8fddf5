#include "report.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <system_error>

#include "lognnet/error.hpp"

namespace lognnet::cli {

double round6(double v) {
  if (!std::isfinite(v)) return v;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return std::strtod(buf, nullptr);
}

nlohmann::json round_floats(const nlohmann::json& j) {
  if (j.is_number_float()) return round6(j.get<double>());
  if (j.is_array() || j.is_object()) {
    nlohmann::json out = j;
    for (auto& v : out) v = round_floats(v);
    return out;
  }
  return j;
}

std::string manifest_hash(const nlohmann::json& manifest) {
  nlohmann::json keyed = manifest;
  keyed.erase("output_dir");
  if (keyed.contains("options")) keyed["options"].erase("output_dir");
  const std::string text = keyed.dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

nlohmann::json make_report(const nlohmann::json& manifest, const nlohmann::json& result) {
  return round_floats({{"schema_version", kReportSchemaVersion},
                       {"command", manifest.at("command")},
                       {"manifest", manifest},
                       {"result", result}});
}

std::string report_stem(const nlohmann::json& manifest) {
  return manifest.at("command").get<std::string>() + "-" + manifest_hash(manifest);
}

std::filesystem::path write_output(const std::filesystem::path& dir, const std::string& name,
                                   const std::string& text) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot create '" + dir.string() + "': " + ec.message());
  const auto path = dir / name;
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw Error(ErrorCode::kIo, "cannot write '" + path.string() + "'");
  return path;
}

}  // namespace lognnet::cli
