#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "lognnet/chaos.hpp"

namespace lognnet {

/// LogNNet N:P:H:M.
struct NetworkShape {
  std::size_t N = 51;  // input features
  std::size_t P = 50;  // reservoir outputs
  std::size_t H = 20;  // hidden neurons
  std::size_t M = 2;   // classes

  void validate() const;
  std::string to_string() const;
  /// Parses "N:P:H:M".
  static NetworkShape parse(const std::string& text);

  friend bool operator==(const NetworkShape&, const NetworkShape&) = default;
};

/// Row-major dense matrix.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

  double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
  double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }

  friend bool operator==(const Matrix&, const Matrix&) = default;
};

/// Trainable head. Column 0 of each matrix multiplies the bias element.
struct ClassifierWeights {
  Matrix hidden;  // H x (P+1)
  Matrix output;  // M x (H+1)

  friend bool operator==(const ClassifierWeights&, const ClassifierWeights&) = default;
};

struct LogNNetModel {
  NetworkShape shape;
  GeneratorParams gen;
  std::optional<ReservoirMatrix> reservoir;  // empty: regenerate columns on demand
  std::vector<double> divisors;              // length N, all > 0
  ClassifierWeights weights;

  /// Fills `reservoir` from `gen` if it is not already materialized.
  void materialize();
};

struct ForwardTrace {
  std::vector<double> Y;        // N+1, Y[0] = 1
  std::vector<double> S_prime;  // P
  std::vector<double> S_h;      // P+1, S_h[0] = 1
  std::vector<double> S_h2;     // H
  std::vector<double> S_out;    // M, sums to 1
};

/// Builds W from the generator and draws the head uniformly from
/// [-0.5, 0.5] with a seeded generator.
LogNNetModel init_model(const NetworkShape& shape, const GeneratorParams& gen,
                        std::vector<double> divisors, std::uint64_t seed,
                        bool materialize_reservoir = true);

ForwardTrace forward(const LogNNetModel& model, std::span<const double> d);
std::size_t predict(const LogNNetModel& model, std::span<const double> d);

/// The reservoir half of the forward pass: returns S_h (length P+1). W and the
/// divisors are frozen during training, so this can be computed once per
/// sample.
std::vector<double> reservoir_features(const LogNNetModel& model, std::span<const double> d);

/// The classifier half of the forward pass; fills trace.S_h2 and trace.S_out.
void head_forward(const ClassifierWeights& w, std::span<const double> s_h,
                  std::vector<double>& s_h2, std::vector<double>& s_out);

/// Index of the largest probability; ties go to the lower index.
std::size_t argmax(std::span<const double> probs);

struct FootprintBreakdown {
  std::size_t reservoir = 0;
  std::size_t classifier = 0;
  std::size_t buffers = 0;
  std::size_t total = 0;
};

/// RAM estimate for running the network on a device. With ram_saving the
/// reservoir term is a single regenerated column of N+1 values.
FootprintBreakdown estimate_footprint(const NetworkShape& shape, std::size_t bytes_per_weight,
                                      bool ram_saving);

inline constexpr int kModelFormatVersion = 1;

nlohmann::json model_to_json(const LogNNetModel& model);
/// Reservoir entries are not stored; the loaded model regenerates them.
LogNNetModel model_from_json(const nlohmann::json& j);

nlohmann::json to_json(const GeneratorParams& p);
GeneratorParams generator_from_json(const nlohmann::json& j);

}  // namespace lognnet
