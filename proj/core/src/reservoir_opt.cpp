#include "lognnet/reservoir_opt.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <ostream>

#include <nlohmann/json.hpp>

#include "lognnet/detail/parallel.hpp"
#include "lognnet/detail/rng.hpp"
#include "lognnet/error.hpp"

namespace lognnet {

void PsoConfig::validate() const {
  if (swarm_size < 1) throw Error(ErrorCode::kInvalidParameter, "swarm size must be >= 1");
  if (!(bounds.K_lo < bounds.K_hi && bounds.D_lo < bounds.D_hi && bounds.L_lo < bounds.L_hi &&
        bounds.C_lo < bounds.C_hi)) {
    throw Error(ErrorCode::kInvalidParameter, "every search bound needs lo < hi");
  }
  if (!(bounds.L_lo > 0.0)) throw Error(ErrorCode::kInvalidParameter, "L lower bound must be > 0");
  if (fitness_epochs < 1) throw Error(ErrorCode::kInvalidParameter, "fitness epochs must be >= 1");
  if (!(max_velocity_fraction > 0.0)) {
    throw Error(ErrorCode::kInvalidParameter, "velocity fraction must be positive");
  }
}

double reservoir_fitness(const Dataset& ds, const NetworkShape& shape, const GeneratorParams& gen,
                         const FeatureMask& mask, const TrainConfig& train_cfg,
                         std::size_t epochs) {
  if (ds.samples.empty()) throw Error(ErrorCode::kInvalidParameter, "dataset is empty");
  TrainConfig cfg = train_cfg;
  cfg.epochs = epochs;
  const auto model = train_full(ds, shape, gen, mask, cfg);
  std::size_t correct = 0;
  for (const auto& s : ds.samples) {
    const auto masked = apply_mask(s, mask);
    if (static_cast<int>(predict(model, masked.values)) == s.label) ++correct;
  }
  return 100.0 * static_cast<double>(correct) / static_cast<double>(ds.size());
}

namespace {

using Point = std::array<double, 4>;  // K, D, L, C

GeneratorParams to_params(const Point& x) { return {x[0], x[1], x[2], x[3]}; }

std::array<std::pair<double, double>, 4> box(const GeneratorBounds& b) {
  return {{{b.K_lo, b.K_hi}, {b.D_lo, b.D_hi}, {b.L_lo, b.L_hi}, {b.C_lo, b.C_hi}}};
}

}  // namespace

PsoResult optimize_reservoir(const Dataset& ds, const NetworkShape& shape,
                             const FeatureMask& mask, const PsoConfig& pso,
                             const TrainConfig& train_cfg) {
  pso.validate();
  if (ds.samples.empty()) throw Error(ErrorCode::kInvalidParameter, "dataset is empty");

  const auto limits = box(pso.bounds);
  std::array<double, 4> vmax{};
  for (std::size_t d = 0; d < 4; ++d) {
    vmax[d] = pso.max_velocity_fraction * (limits[d].second - limits[d].first);
  }

  detail::Rng rng(pso.seed);
  const std::size_t n = pso.swarm_size;
  std::vector<Point> x(n), v(n), pbest(n);
  std::vector<double> fx(n, 0.0), fbest(n, 0.0);

  // Positions first, then velocities, so the initial positions are the same
  // stream a plain random search with this seed would draw.
  for (auto& p : x) {
    for (std::size_t d = 0; d < 4; ++d) p[d] = rng.uniform(limits[d].first, limits[d].second);
  }
  for (auto& p : v) {
    for (std::size_t d = 0; d < 4; ++d) p[d] = rng.uniform(-vmax[d], vmax[d]);
  }

  auto evaluate_all = [&] {
    detail::parallel_for(n, pso.jobs, [&](std::size_t i) {
      fx[i] = reservoir_fitness(ds, shape, to_params(x[i]), mask, train_cfg, pso.fitness_epochs);
    });
  };

  auto snapshot = [&](std::size_t it, const Point& g, double fg) {
    PsoIteration entry{it, fg, to_params(g), {}};
    entry.positions.reserve(n);
    for (const auto& p : x) entry.positions.push_back(to_params(p));
    return entry;
  };

  evaluate_all();
  pbest = x;
  fbest = fx;
  std::size_t g = 0;
  for (std::size_t i = 1; i < n; ++i) {
    if (fbest[i] > fbest[g]) g = i;
  }
  Point gbest = pbest[g];
  double fg = fbest[g];

  PsoResult result;
  result.log.push_back(snapshot(0, gbest, fg));
  auto target_hit = [&] { return pso.target_accuracy && fg >= *pso.target_accuracy; };

  for (std::size_t it = 1; it <= pso.iterations && !target_hit(); ++it) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t d = 0; d < 4; ++d) {
        const double r1 = rng.uniform01();
        const double r2 = rng.uniform01();
        double vel = pso.inertia * v[i][d] + pso.cognitive * r1 * (pbest[i][d] - x[i][d]) +
                     pso.social * r2 * (gbest[d] - x[i][d]);
        vel = std::clamp(vel, -vmax[d], vmax[d]);
        double pos = x[i][d] + vel;
        if (pos < limits[d].first || pos > limits[d].second) {
          pos = std::clamp(pos, limits[d].first, limits[d].second);
          vel = 0.0;
        }
        x[i][d] = pos;
        v[i][d] = vel;
      }
    }
    evaluate_all();
    for (std::size_t i = 0; i < n; ++i) {
      if (fx[i] > fbest[i]) {
        fbest[i] = fx[i];
        pbest[i] = x[i];
      }
      if (fbest[i] > fg) {
        fg = fbest[i];
        gbest = pbest[i];
      }
    }
    result.log.push_back(snapshot(it, gbest, fg));
  }

  result.best = to_params(gbest);
  result.fitness = fg;
  result.reached_target = target_hit();
  return result;
}

void write_iteration_log_csv(std::ostream& out, const PsoResult& result) {
  out << "iteration,gbest_fitness,K,D,L,C\n";
  char buf[160];
  for (const auto& e : result.log) {
    std::snprintf(buf, sizeof buf, "%zu,%.6g,%.6g,%.6g,%.6g,%.6g\n", e.iteration,
                  e.gbest_fitness, e.gbest.K, e.gbest.D, e.gbest.L, e.gbest.C);
    out << buf;
  }
}

nlohmann::json to_json(const PsoConfig& c) {
  nlohmann::json j{{"swarm_size", c.swarm_size},
                   {"iterations", c.iterations},
                   {"inertia", c.inertia},
                   {"cognitive", c.cognitive},
                   {"social", c.social},
                   {"max_velocity_fraction", c.max_velocity_fraction},
                   {"seed", c.seed},
                   {"fitness_epochs", c.fitness_epochs},
                   {"bounds",
                    {{"K", {c.bounds.K_lo, c.bounds.K_hi}},
                     {"D", {c.bounds.D_lo, c.bounds.D_hi}},
                     {"L", {c.bounds.L_lo, c.bounds.L_hi}},
                     {"C", {c.bounds.C_lo, c.bounds.C_hi}}}}};
  j["target_accuracy"] = c.target_accuracy ? nlohmann::json(*c.target_accuracy) : nlohmann::json();
  return j;
}

nlohmann::json to_json(const PsoResult& r) {
  nlohmann::json iterations = nlohmann::json::array();
  for (const auto& e : r.log) {
    iterations.push_back({{"iteration", e.iteration},
                          {"gbest_fitness", e.gbest_fitness},
                          {"gbest", to_json(e.gbest)}});
  }
  return {{"generator", to_json(r.best)},
          {"fitness", r.fitness},
          {"reached_target", r.reached_target},
          {"iterations", iterations}};
}

}  // namespace lognnet
