#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "lognnet/chaos.hpp"
#include "lognnet/dataset.hpp"
#include "lognnet/network.hpp"
#include "lognnet/training.hpp"

namespace lognnet {

struct PsoConfig {
  std::size_t swarm_size = 20;
  std::size_t iterations = 30;
  double inertia = 0.729;
  double cognitive = 1.49445;
  double social = 1.49445;
  double max_velocity_fraction = 0.2;  // of each bound range
  GeneratorBounds bounds;
  std::optional<double> target_accuracy;  // percent
  std::uint64_t seed = 1;
  std::size_t fitness_epochs = 50;
  unsigned jobs = 1;

  void validate() const;
};

struct PsoIteration {
  std::size_t iteration = 0;  // 0 = initial swarm
  double gbest_fitness = 0.0;
  GeneratorParams gbest;
  std::vector<GeneratorParams> positions;  // every particle after this step
};

struct PsoResult {
  GeneratorParams best;
  double fitness = 0.0;
  std::vector<PsoIteration> log;
  bool reached_target = false;
};

/// Training-set accuracy of a model trained on the whole dataset and scored on
/// the same samples. This is the optimizer's fitness.
double reservoir_fitness(const Dataset& ds, const NetworkShape& shape, const GeneratorParams& gen,
                         const FeatureMask& mask, const TrainConfig& train_cfg,
                         std::size_t epochs);

/// Particle swarm search over (K, D, L, C) maximizing reservoir_fitness.
PsoResult optimize_reservoir(const Dataset& ds, const NetworkShape& shape,
                             const FeatureMask& mask, const PsoConfig& pso,
                             const TrainConfig& train_cfg);

/// iteration,gbest_fitness,K,D,L,C
void write_iteration_log_csv(std::ostream& out, const PsoResult& result);

nlohmann::json to_json(const PsoConfig& c);
nlohmann::json to_json(const PsoResult& r);

}  // namespace lognnet
