#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace lognnet {

/// Ordered feature names; feature z (1-based) is names[z - 1].
class FeatureRegistry {
 public:
  FeatureRegistry(std::string id, std::vector<std::string> names,
                  std::array<std::string, 2> class_names, std::vector<std::string> units = {});

  const std::string& id() const noexcept { return id_; }
  std::size_t size() const noexcept { return names_.size(); }
  const std::vector<std::string>& names() const noexcept { return names_; }
  const std::string& name(std::size_t z) const { return names_.at(z - 1); }
  const std::array<std::string, 2>& class_names() const noexcept { return class_names_; }
  /// Measurement unit of feature z, empty when unknown.
  std::string unit(std::size_t z) const;

  /// 1-based index of `name`, or 0 when absent.
  std::size_t index_of(const std::string& name) const noexcept;

  friend bool operator==(const FeatureRegistry&, const FeatureRegistry&) = default;

 private:
  std::string id_;
  std::vector<std::string> names_;
  std::array<std::string, 2> class_names_;
  std::vector<std::string> units_;
};

/// 51-feature diagnosis registry (COVID-19 positive = 1).
const FeatureRegistry& rbv1_registry();
/// 51-feature prognosis registry (ICU = 1).
const FeatureRegistry& rbv2_registry();

struct Sample {
  std::vector<double> values;
  int label = 0;
  std::vector<bool> missing;  // empty, or one flag per value

  bool has_missing() const noexcept;
};

struct Dataset {
  FeatureRegistry registry;
  std::vector<Sample> samples;

  std::size_t num_features() const noexcept { return registry.size(); }
  std::size_t size() const noexcept { return samples.size(); }
  std::array<std::size_t, 2> class_counts() const;
};

/// The removed set FR over features 1..NF. The selected set FS is its
/// complement.
class FeatureMask {
 public:
  FeatureMask() = default;
  explicit FeatureMask(std::size_t num_features) : removed_(num_features, false) {}

  static FeatureMask from_removed(std::size_t num_features, const std::vector<std::size_t>& fr);
  static FeatureMask from_selected(std::size_t num_features, const std::vector<std::size_t>& fs);

  std::size_t num_features() const noexcept { return removed_.size(); }
  bool is_removed(std::size_t z) const { return removed_.at(z - 1); }
  void remove(std::size_t z);

  std::vector<std::size_t> removed() const;
  std::vector<std::size_t> selected() const;
  std::size_t num_selected() const noexcept;

  friend bool operator==(const FeatureMask&, const FeatureMask&) = default;

 private:
  std::vector<bool> removed_;
};

struct CsvOptions {
  char delimiter = ',';
  std::string label_column = "label";
};

/// Reads a CSV whose non-label columns are exactly the registry's features in
/// order. Empty, "NA" and "NaN" cells are recorded as missing.
Dataset load_csv(const std::filesystem::path& path, const FeatureRegistry& registry,
                 const CsvOptions& options = {});
Dataset read_csv(std::istream& in, const FeatureRegistry& registry,
                 const CsvOptions& options = {});

/// Builds a registry from a CSV header: every column except the label column
/// becomes a feature.
FeatureRegistry registry_from_csv_header(const std::filesystem::path& path,
                                         const CsvOptions& options = {});

/// Writes the same dialect the loader reads, label column last, values with
/// round-trip precision.
void write_csv(std::ostream& out, const Dataset& ds, const CsvOptions& options = {});
void save_csv(const std::filesystem::path& path, const Dataset& ds,
              const CsvOptions& options = {});

/// Replaces every missing cell with the mean of the observed values of that
/// feature over the whole dataset.
Dataset impute_means(const Dataset& ds);

/// Per-feature max |value| over the samples after masking; 1 for all-zero
/// columns.
std::vector<double> normalization_divisors(const std::vector<Sample>& training,
                                           const FeatureMask& mask);
std::vector<double> normalization_divisors(const Dataset& training, const FeatureMask& mask);

/// Zeroes the removed components.
Sample apply_mask(const Sample& s, const FeatureMask& mask);
Dataset apply_mask(const Dataset& ds, const FeatureMask& mask);

}  // namespace lognnet
