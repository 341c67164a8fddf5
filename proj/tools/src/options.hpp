#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "lognnet/chaos.hpp"
#include "lognnet/dataset.hpp"
#include "lognnet/network.hpp"
#include "lognnet/reservoir_opt.hpp"
#include "lognnet/training.hpp"

namespace lognnet::cli {

/// Everything a run depends on. The report manifest is this struct plus the
/// resolved generator, so a report can be replayed from its manifest alone.
struct RunOptions {
  std::string command;

  std::string dataset;
  std::string registry = "rbv1";  // rbv1 | rbv2 | custom
  std::string label_column = "label";
  char delimiter = ',';
  bool impute = true;

  std::string shape;  // empty: N from the registry, then 50:20:2
  std::size_t epochs = 100;
  std::vector<std::size_t> epoch_sweep;
  double learning_rate = 0.1;
  std::size_t folds = 5;
  bool stratified = true;
  std::uint64_t seed = 1;
  unsigned jobs = 1;

  std::string gen;  // K,D,L,C | table4:rbv1 | table4:rbv2 | optimize; empty picks by registry
  std::string modulo = "euclidean";

  std::optional<std::vector<std::size_t>> fs;
  std::optional<std::vector<std::size_t>> fr;

  std::size_t swarm = 20;
  std::size_t iterations = 30;
  std::size_t fitness_epochs = 50;
  std::optional<double> target;

  std::size_t repeats = 1;

  std::vector<std::size_t> features;  // hist
  std::optional<double> bin_size;

  std::size_t bytes = 4;  // footprint
  bool ram_saving = false;

  std::string out = "results";
};

nlohmann::json to_json(const RunOptions& o);
RunOptions options_from_json(const nlohmann::json& j);

/// "3,7,12" -> {3, 7, 12}. Throws a usage error on anything else, including
/// an empty list.
std::vector<std::size_t> parse_index_list(const std::string& text, const char* flag);

/// Resolves --gen without running the optimizer. Returns nullopt for
/// "optimize".
std::optional<GeneratorParams> parse_generator(const RunOptions& o);
ModuloConvention parse_modulo(const std::string& text);

NetworkShape resolve_shape(const RunOptions& o, std::size_t num_features);
TrainConfig train_config(const RunOptions& o);
PsoConfig pso_config(const RunOptions& o);
FeatureMask resolve_mask(const RunOptions& o, std::size_t num_features);

}  // namespace lognnet::cli
