#include "lognnet/threshold.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <ostream>
#include <string>

#include "lognnet/error.hpp"
#include "lognnet/training.hpp"

namespace lognnet {

namespace {

void check_feature(const Dataset& ds, std::size_t z) {
  if (z < 1 || z > ds.num_features()) {
    throw Error(ErrorCode::kInvalidParameter,
                "feature " + std::to_string(z) + " outside 1.." + std::to_string(ds.num_features()));
  }
}

}  // namespace

ThresholdResult threshold_search(const Dataset& ds, std::size_t z) {
  check_feature(ds, z);
  const auto counts = ds.class_counts();
  if (counts[0] == 0 || counts[1] == 0) {
    throw Error(ErrorCode::kLabel, "threshold search needs samples of both classes");
  }

  const auto balanced = balance_training_set(ds.samples);
  std::vector<std::pair<double, int>> points;
  points.reserve(balanced.size());
  for (const auto& s : balanced) points.emplace_back(s.values[z - 1], s.label);
  std::sort(points.begin(), points.end());

  const std::size_t n = points.size();
  std::size_t pos_total = 0;
  for (const auto& p : points) pos_total += p.second == 1 ? 1 : 0;
  const std::size_t neg_total = n - pos_total;

  // Candidate cuts in ascending order with the class counts strictly above.
  struct Cut {
    double value;
    std::size_t pos_above;
    std::size_t neg_above;
  };
  std::vector<Cut> cuts;
  const double lo = points.front().first;
  const double hi = points.back().first;
  cuts.push_back({std::nextafter(lo, -std::numeric_limits<double>::infinity()), pos_total, neg_total});

  std::size_t pos_above = pos_total, neg_above = neg_total;
  for (std::size_t i = 0; i < n;) {
    const double v = points[i].first;
    while (i < n && points[i].first == v) {
      (points[i].second == 1 ? pos_above : neg_above) -= 1;
      ++i;
    }
    if (i < n) {
      const double next = points[i].first;
      double mid = v + (next - v) / 2.0;
      if (!(mid >= v && mid < next)) mid = v;
      cuts.push_back({mid, pos_above, neg_above});
    } else {
      cuts.push_back({v, 0, 0});
    }
  }

  ThresholdResult best;
  best.feature = z;
  best.min = lo;
  best.max = hi;
  best.degenerate = lo == hi;
  std::size_t best_correct = 0;
  bool have = false;
  for (int type : {1, 2}) {
    for (const auto& c : cuts) {
      const std::size_t correct = type == 1 ? c.pos_above + (neg_total - c.neg_above)
                                            : c.neg_above + (pos_total - c.pos_above);
      if (!have || correct > best_correct) {
        have = true;
        best_correct = correct;
        best.threshold = c.value;
        best.type = type;
      }
    }
  }
  best.accuracy = 100.0 * static_cast<double>(best_correct) / static_cast<double>(n);
  return best;
}

std::vector<ThresholdResult> threshold_table(const Dataset& ds) {
  std::vector<ThresholdResult> rows;
  for (std::size_t z = 1; z <= ds.num_features(); ++z) rows.push_back(threshold_search(ds, z));
  std::stable_sort(rows.begin(), rows.end(),
                   [](const auto& a, const auto& b) { return a.accuracy > b.accuracy; });
  return rows;
}

void write_threshold_table_csv(std::ostream& out, const Dataset& ds,
                               const std::vector<ThresholdResult>& rows) {
  out << "index,feature,A_th,V_th,units,type,min,max\n";
  char buf[256];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%zu,%s,%.6g,%.6g,%s,%d,%.6g,%.6g\n", r.feature,
                  ds.registry.name(r.feature).c_str(), r.accuracy, r.threshold,
                  ds.registry.unit(r.feature).c_str(), r.type, r.min, r.max);
    out << buf;
  }
}

Histogram class_histogram(const Dataset& ds, const HistogramSpec& spec) {
  check_feature(ds, spec.feature);
  if (!(spec.bin_size > 0.0) || !std::isfinite(spec.bin_size)) {
    throw Error(ErrorCode::kInvalidParameter, "histogram bin size must be positive");
  }
  const std::size_t k = spec.feature - 1;

  double lo = 0.0, hi = 0.0;
  if (spec.range) {
    std::tie(lo, hi) = *spec.range;
    if (!(lo <= hi)) throw Error(ErrorCode::kInvalidParameter, "histogram range needs min <= max");
  } else if (!ds.samples.empty()) {
    lo = hi = ds.samples.front().values[k];
    for (const auto& s : ds.samples) {
      lo = std::min(lo, s.values[k]);
      hi = std::max(hi, s.values[k]);
    }
  }

  const auto bins = static_cast<std::size_t>(std::floor((hi - lo) / spec.bin_size)) + 1;
  Histogram h;
  h.feature = spec.feature;
  h.bin_size = spec.bin_size;
  h.lower_edges.resize(bins);
  for (std::size_t b = 0; b < bins; ++b) h.lower_edges[b] = lo + static_cast<double>(b) * spec.bin_size;
  h.counts[0].assign(bins, 0);
  h.counts[1].assign(bins, 0);

  for (const auto& s : ds.samples) {
    const double v = s.values[k];
    if (v < lo || v > hi) continue;
    auto b = static_cast<std::size_t>(std::floor((v - lo) / spec.bin_size));
    b = std::min(b, bins - 1);
    ++h.counts.at(static_cast<std::size_t>(s.label))[b];
  }
  return h;
}

void write_histogram_csv(std::ostream& out, const Dataset& ds, const Histogram& h) {
  const auto& names = ds.registry.class_names();
  out << "bin_lower," << names[0] << ',' << names[1] << '\n';
  char buf[96];
  for (std::size_t b = 0; b < h.lower_edges.size(); ++b) {
    std::snprintf(buf, sizeof buf, "%.6g,%zu,%zu\n", h.lower_edges[b], h.counts[0][b],
                  h.counts[1][b]);
    out << buf;
  }
}

std::optional<double> published_bin_size(const FeatureRegistry& registry, std::size_t z) {
  // Bin sizes printed alongside the published threshold tables, by feature
  // name. Features without one need an explicit bin size.
  static const std::map<std::string, double> rbv1{
      {"LDL", 3.4},  {"HDL-C", 1.0}, {"Cholesterol", 6.0}, {"MCHC", 0.2}, {"Triglyceride", 17.0},
      {"Amylase", 3.0}, {"MONO", 0.06}, {"HCT", 60.0}, {"aPTT", 238.0}, {"RBC", 0.06},
      {"MCH", 0.2},
  };
  static const std::map<std::string, double> rbv2{
      {"NEU", 0.3}, {"Albumin", 0.5}, {"WBC", 0.6},  {"CRP", 5.0},  {"Urea", 3.0},
      {"Calcium", 0.1}, {"TP", 0.8},  {"RDW", 0.16}, {"Glucose", 8.0}, {"HGB", 0.15},
      {"MPV", 0.07}, {"RBC", 0.06},   {"Chlorine", 0.58}, {"ESR", 1.37}, {"ALP", 31.0},
  };
  const std::map<std::string, double>* table = nullptr;
  if (registry.id() == "rbv1") table = &rbv1;
  if (registry.id() == "rbv2") table = &rbv2;
  if (!table || z < 1 || z > registry.size()) return std::nullopt;
  if (auto it = table->find(registry.name(z)); it != table->end()) return it->second;
  return std::nullopt;
}

}  // namespace lognnet
