#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <optional>
#include <utility>
#include <vector>

#include "lognnet/dataset.hpp"

namespace lognnet {

/// Single-feature rule. Type 1: value > threshold predicts class 1.
/// Type 2: value > threshold predicts class 0.
struct ThresholdResult {
  std::size_t feature = 0;
  double threshold = 0.0;
  int type = 1;
  double accuracy = 0.0;  // percent, on the balanced set
  double min = 0.0;
  double max = 0.0;
  bool degenerate = false;  // constant feature, no separating cut exists
};

/// Exhaustive search over the cuts between consecutive distinct values of
/// feature z, after balancing the whole dataset. The extreme candidates are
/// the value just below the minimum and the maximum itself. Ties prefer
/// Type 1, then the smaller threshold.
ThresholdResult threshold_search(const Dataset& ds, std::size_t z);

/// threshold_search for every feature, sorted by accuracy descending (ties by
/// ascending feature index).
std::vector<ThresholdResult> threshold_table(const Dataset& ds);

/// index,feature,A_th,V_th,units,type,min,max
void write_threshold_table_csv(std::ostream& out, const Dataset& ds,
                               const std::vector<ThresholdResult>& rows);

struct HistogramSpec {
  std::size_t feature = 0;
  double bin_size = 1.0;
  std::optional<std::pair<double, double>> range;  // defaults to the data range
};

struct Histogram {
  std::size_t feature = 0;
  double bin_size = 0.0;
  std::vector<double> lower_edges;
  std::array<std::vector<std::size_t>, 2> counts;
};

/// Bins [min + k*b, min + (k+1)*b) covering [min, max], one count vector per
/// class. Values outside an explicit range are not counted.
Histogram class_histogram(const Dataset& ds, const HistogramSpec& spec);

/// bin_lower,<class 0 name>,<class 1 name>
void write_histogram_csv(std::ostream& out, const Dataset& ds, const Histogram& h);

/// Published histogram bin size for feature z of a built-in registry, when
/// one was given.
std::optional<double> published_bin_size(const FeatureRegistry& registry, std::size_t z);

}  // namespace lognnet
