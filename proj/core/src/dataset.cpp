#include "lognnet/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <unordered_set>

#include "lognnet/error.hpp"

namespace lognnet {

FeatureRegistry::FeatureRegistry(std::string id, std::vector<std::string> names,
                                 std::array<std::string, 2> class_names,
                                 std::vector<std::string> units)
    : id_(std::move(id)),
      names_(std::move(names)),
      class_names_(std::move(class_names)),
      units_(std::move(units)) {
  if (!units_.empty() && units_.size() != names_.size()) {
    throw Error(ErrorCode::kSchema, "unit list length differs from the feature list");
  }
  if (names_.empty()) {
    throw Error(ErrorCode::kSchema, "feature registry must not be empty");
  }
  std::unordered_set<std::string> seen;
  for (const auto& n : names_) {
    if (!seen.insert(n).second) {
      throw Error(ErrorCode::kSchema, "duplicate feature name '" + n + "'");
    }
  }
}

std::string FeatureRegistry::unit(std::size_t z) const {
  if (z < 1 || z > names_.size()) throw Error(ErrorCode::kInvalidParameter, "feature index out of range");
  return units_.empty() ? std::string() : units_[z - 1];
}

namespace {

// Units of the blood values, keyed by feature name.
const std::map<std::string, std::string>& unit_table() {
  static const std::map<std::string, std::string> units{
      {"CRP", "mg/L"},          {"D-Dimer", "µg/L"},     {"Ferritin", "µg/L"},
      {"Fibrinogen", "mg/dL"},  {"INR", "no unit"},      {"PT", "Sec"},
      {"PCT", "ng/mL"},         {"ESR", "mm/hr"},        {"Troponin", "ng/L"},
      {"aPTT", "Sec"},          {"LYM", "10³/µL"},       {"NEU", "10³/µL"},
      {"PLT", "10³/µL"},        {"WBC", "10³/µL"},       {"BASO", "10³/µL"},
      {"EOS", "10³/µL"},        {"HCT", "%"},            {"HGB", "g/L"},
      {"MCH", "pg"},            {"MCHC", "g/dL"},        {"MCV", "fL"},
      {"MONO", "10³/µL"},       {"MPV", "fL"},           {"PDW", "fL"},
      {"RBC", "10⁶/µL"},        {"RDW", "%"},            {"ALT", "u/L"},
      {"AST", "u/L"},           {"Albumin", "g/L"},      {"ALP", "u/L"},
      {"Amylase", "u/L"},       {"CK-MB", "u/L"},        {"D-Bil", "mg/dL"},
      {"GGT", "u/L"},           {"Glucose", "mg/dL"},    {"HDL-C", "mg/dL"},
      {"Calcium", "mg/dL"},     {"Chlorine", "mmol/L"},  {"Cholesterol", "mg/dL"},
      {"Creatinine", "mg/dL"},  {"CK", "u/L"},           {"LDH", "u/L"},
      {"LDL", "mg/dL"},         {"Potassium", "mmol/L"}, {"Sodium", "mmol/L"},
      {"T-Bil", "mg/dL"},       {"TP", "g/L"},           {"Triglyceride", "mg/dL"},
      {"eGFR", "no unit"},      {"Urea", "mg/dL"},       {"UA", "mg/dL"},
  };
  return units;
}

std::vector<std::string> units_for(const std::vector<std::string>& names) {
  std::vector<std::string> out;
  for (const auto& n : names) out.push_back(unit_table().at(n));
  return out;
}

FeatureRegistry blood_registry(std::string id, std::vector<std::string> names,
                               std::array<std::string, 2> class_names) {
  auto units = units_for(names);
  return FeatureRegistry(std::move(id), std::move(names), std::move(class_names),
                         std::move(units));
}

}  // namespace

std::size_t FeatureRegistry::index_of(const std::string& name) const noexcept {
  auto it = std::find(names_.begin(), names_.end(), name);
  return it == names_.end() ? 0 : static_cast<std::size_t>(it - names_.begin()) + 1;
}

const FeatureRegistry& rbv1_registry() {
  static const FeatureRegistry registry = blood_registry(
      "rbv1",
      {"CRP",         "D-Dimer",  "Ferritin", "Fibrinogen", "INR",       "PT",
       "PCT",         "ESR",      "Troponin", "aPTT",       "LYM",       "NEU",
       "PLT",         "WBC",      "BASO",     "EOS",        "HCT",       "HGB",
       "MCH",         "MCHC",     "MCV",      "MONO",       "MPV",       "PDW",
       "RBC",         "RDW",      "ALT",      "AST",        "Albumin",   "ALP",
       "Amylase",     "CK-MB",    "D-Bil",    "GGT",        "Glucose",   "HDL-C",
       "Calcium",     "Chlorine", "Cholesterol", "Creatinine", "CK",     "LDH",
       "LDL",         "Potassium", "Sodium",  "T-Bil",      "TP",        "Triglyceride",
       "eGFR",        "Urea",     "UA"},
      {"non-COVID-19", "COVID-19"});
  return registry;
}

const FeatureRegistry& rbv2_registry() {
  static const FeatureRegistry registry = blood_registry(
      "rbv2",
      {"ALT",       "AST",      "Albumin",  "ALP",         "Amylase",  "CK-MB",
       "D-Bil",     "GGT",      "Glucose",  "HDL-C",       "Calcium",  "Chlorine",
       "Cholesterol", "Creatinine", "CK",   "LDH",         "LDL",      "Potassium",
       "Sodium",    "T-Bil",    "TP",       "Triglyceride", "eGFR",    "Urea",
       "UA",        "BASO",     "EOS",      "HCT",         "HGB",      "LYM",
       "MCH",       "MCHC",     "MCV",      "MONO",        "MPV",      "NEU",
       "PDW",       "PLT",      "RBC",      "RDW",         "WBC",      "CRP",
       "D-Dimer",   "Ferritin", "Fibrinogen", "INR",       "PT",       "PCT",
       "ESR",       "Troponin", "aPTT"},
      {"non-ICU", "ICU"});
  return registry;
}

bool Sample::has_missing() const noexcept {
  return std::find(missing.begin(), missing.end(), true) != missing.end();
}

std::array<std::size_t, 2> Dataset::class_counts() const {
  std::array<std::size_t, 2> counts{0, 0};
  for (const auto& s : samples) ++counts.at(static_cast<std::size_t>(s.label));
  return counts;
}

FeatureMask FeatureMask::from_removed(std::size_t num_features,
                                      const std::vector<std::size_t>& fr) {
  FeatureMask mask(num_features);
  for (auto z : fr) mask.remove(z);
  return mask;
}

FeatureMask FeatureMask::from_selected(std::size_t num_features,
                                       const std::vector<std::size_t>& fs) {
  FeatureMask keep(num_features);
  for (auto z : fs) keep.remove(z);
  FeatureMask mask(num_features);
  for (std::size_t z = 1; z <= num_features; ++z) {
    if (!keep.is_removed(z)) mask.remove(z);
  }
  return mask;
}

void FeatureMask::remove(std::size_t z) {
  if (z < 1 || z > removed_.size()) {
    throw Error(ErrorCode::kInvalidParameter,
                "feature index " + std::to_string(z) + " outside 1.." +
                    std::to_string(removed_.size()));
  }
  removed_[z - 1] = true;
}

std::vector<std::size_t> FeatureMask::removed() const {
  std::vector<std::size_t> out;
  for (std::size_t z = 1; z <= removed_.size(); ++z) {
    if (removed_[z - 1]) out.push_back(z);
  }
  return out;
}

std::vector<std::size_t> FeatureMask::selected() const {
  std::vector<std::size_t> out;
  for (std::size_t z = 1; z <= removed_.size(); ++z) {
    if (!removed_[z - 1]) out.push_back(z);
  }
  return out;
}

std::size_t FeatureMask::num_selected() const noexcept {
  return static_cast<std::size_t>(std::count(removed_.begin(), removed_.end(), false));
}

namespace {

std::string trim(std::string_view s) {
  const auto* ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_record(const std::string& line, char delimiter) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        field += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == delimiter) {
      fields.push_back(trim(field));
      field.clear();
    } else {
      field += c;
    }
  }
  fields.push_back(trim(field));
  return fields;
}

bool is_missing_token(const std::string& cell) {
  return cell.empty() || cell == "NA" || cell == "NaN" || cell == "nan";
}

std::string strip_bom(std::string line) {
  if (line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF &&
      static_cast<unsigned char>(line[1]) == 0xBB && static_cast<unsigned char>(line[2]) == 0xBF) {
    line.erase(0, 3);
  }
  return line;
}

std::size_t find_label_column(const std::vector<std::string>& header,
                              const std::string& label_column) {
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (header[c] == label_column) return c;
  }
  throw Error(ErrorCode::kSchema, "label column '" + label_column + "' not found in header");
}

}  // namespace

Dataset read_csv(std::istream& in, const FeatureRegistry& registry, const CsvOptions& options) {
  std::string line;
  if (!std::getline(in, line)) {
    throw Error(ErrorCode::kSchema, "CSV input is empty");
  }
  const auto header = split_record(strip_bom(line), options.delimiter);
  const std::size_t label_col = find_label_column(header, options.label_column);

  if (header.size() != registry.size() + 1) {
    throw Error(ErrorCode::kSchema, "header has " + std::to_string(header.size() - 1) +
                                        " feature columns, registry '" + registry.id() +
                                        "' expects " + std::to_string(registry.size()));
  }
  std::vector<std::size_t> feature_cols;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (c == label_col) continue;
    const std::size_t z = feature_cols.size() + 1;
    if (header[c] != registry.name(z)) {
      throw Error(ErrorCode::kSchema, "column " + std::to_string(c + 1) + " is '" + header[c] +
                                          "', expected feature " + std::to_string(z) + " '" +
                                          registry.name(z) + "'");
    }
    feature_cols.push_back(c);
  }

  Dataset ds{registry, {}};
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (trim(line).empty()) continue;
    const auto cells = split_record(line, options.delimiter);
    if (cells.size() != header.size()) {
      throw Error(ErrorCode::kParse, "row " + std::to_string(row) + " has " +
                                         std::to_string(cells.size()) + " cells, expected " +
                                         std::to_string(header.size()));
    }
    Sample s;
    s.values.resize(registry.size(), 0.0);
    s.missing.resize(registry.size(), false);
    for (std::size_t k = 0; k < feature_cols.size(); ++k) {
      const auto& cell = cells[feature_cols[k]];
      if (is_missing_token(cell)) {
        s.missing[k] = true;
        continue;
      }
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (ec != std::errc{} || ptr != cell.data() + cell.size() || !std::isfinite(v)) {
        throw Error(ErrorCode::kParse, "row " + std::to_string(row) + ", column " +
                                           std::to_string(feature_cols[k] + 1) +
                                           ": not a number: '" + cell + "'");
      }
      s.values[k] = v;
    }
    const auto& label = cells[label_col];
    if (label == "0" || label == "0.0") {
      s.label = 0;
    } else if (label == "1" || label == "1.0") {
      s.label = 1;
    } else {
      throw Error(ErrorCode::kLabel, "row " + std::to_string(row) + ": label '" + label +
                                         "' is not 0 or 1");
    }
    ds.samples.push_back(std::move(s));
  }
  return ds;
}

Dataset load_csv(const std::filesystem::path& path, const FeatureRegistry& registry,
                 const CsvOptions& options) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open '" + path.string() + "'");
  return read_csv(in, registry, options);
}

FeatureRegistry registry_from_csv_header(const std::filesystem::path& path,
                                         const CsvOptions& options) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open '" + path.string() + "'");
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::kSchema, "CSV input is empty");
  auto header = split_record(strip_bom(line), options.delimiter);
  const auto label_col = find_label_column(header, options.label_column);
  header.erase(header.begin() + static_cast<std::ptrdiff_t>(label_col));
  return FeatureRegistry("custom", std::move(header), {"class 0", "class 1"});
}

void write_csv(std::ostream& out, const Dataset& ds, const CsvOptions& options) {
  for (const auto& name : ds.registry.names()) out << name << options.delimiter;
  out << options.label_column << '\n';
  char buf[32];
  for (const auto& s : ds.samples) {
    for (std::size_t k = 0; k < s.values.size(); ++k) {
      if (k < s.missing.size() && s.missing[k]) {
        // empty cell
      } else {
        std::snprintf(buf, sizeof buf, "%.17g", s.values[k]);
        out << buf;
      }
      out << options.delimiter;
    }
    out << s.label << '\n';
  }
}

void save_csv(const std::filesystem::path& path, const Dataset& ds, const CsvOptions& options) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot write '" + path.string() + "'");
  write_csv(out, ds, options);
}

Dataset impute_means(const Dataset& ds) {
  const std::size_t nf = ds.num_features();
  std::vector<double> sum(nf, 0.0);
  std::vector<std::size_t> count(nf, 0);
  for (const auto& s : ds.samples) {
    for (std::size_t k = 0; k < nf; ++k) {
      if (k < s.missing.size() && s.missing[k]) continue;
      sum[k] += s.values[k];
      ++count[k];
    }
  }

  Dataset out = ds;
  bool any_missing = false;
  for (const auto& s : ds.samples) any_missing = any_missing || s.has_missing();
  if (!any_missing) {
    for (auto& s : out.samples) s.missing.assign(nf, false);
    return out;
  }
  for (std::size_t k = 0; k < nf; ++k) {
    if (count[k] == 0) {
      throw Error(ErrorCode::kImputation, "feature " + std::to_string(k + 1) + " '" +
                                              ds.registry.name(k + 1) +
                                              "' has no observed values");
    }
  }
  for (auto& s : out.samples) {
    for (std::size_t k = 0; k < nf; ++k) {
      if (k < s.missing.size() && s.missing[k]) {
        s.values[k] = sum[k] / static_cast<double>(count[k]);
      }
    }
    s.missing.assign(nf, false);
  }
  return out;
}

std::vector<double> normalization_divisors(const std::vector<Sample>& training,
                                           const FeatureMask& mask) {
  if (training.empty()) {
    throw Error(ErrorCode::kInvalidParameter, "normalization needs a non-empty training set");
  }
  const std::size_t nf = mask.num_features();
  std::vector<double> divisors(nf, 0.0);
  for (const auto& s : training) {
    if (s.values.size() != nf) throw Error(ErrorCode::kShape, "sample width differs from mask");
    for (std::size_t k = 0; k < nf; ++k) {
      if (mask.is_removed(k + 1)) continue;
      divisors[k] = std::max(divisors[k], std::abs(s.values[k]));
    }
  }
  for (auto& d : divisors) {
    if (d == 0.0) d = 1.0;
  }
  return divisors;
}

std::vector<double> normalization_divisors(const Dataset& training, const FeatureMask& mask) {
  return normalization_divisors(training.samples, mask);
}

Sample apply_mask(const Sample& s, const FeatureMask& mask) {
  Sample out = s;
  for (std::size_t k = 0; k < out.values.size() && k < mask.num_features(); ++k) {
    if (mask.is_removed(k + 1)) out.values[k] = 0.0;
  }
  return out;
}

Dataset apply_mask(const Dataset& ds, const FeatureMask& mask) {
  Dataset out{ds.registry, {}};
  out.samples.reserve(ds.samples.size());
  for (const auto& s : ds.samples) out.samples.push_back(apply_mask(s, mask));
  return out;
}

}  // namespace lognnet
