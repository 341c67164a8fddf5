#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace lognnet {

enum class ModuloConvention {
  kEuclidean,  // result in [0, L)
  kTruncated,  // sign follows the dividend, result in (-L, L)
};

/// Parameters of the congruential chaotic map x' = (D - K*x) mod L with
/// initial state C. All four are real-valued.
struct GeneratorParams {
  double K = 0.0;
  double D = 0.0;
  double L = 1.0;
  double C = 0.0;
  ModuloConvention modulo = ModuloConvention::kEuclidean;

  friend bool operator==(const GeneratorParams&, const GeneratorParams&) = default;
};

/// Search box for the reservoir optimizer. The defaults are the published
/// parameter limits.
struct GeneratorBounds {
  double K_lo = -100.0, K_hi = 100.0;
  double D_lo = -100.0, D_hi = 100.0;
  double L_lo = 2.0, L_hi = 10000.0;
  double C_lo = -100.0, C_hi = 100.0;

  bool contains(const GeneratorParams& p) const noexcept;
};

/// Published optimum for the diagnosis dataset (K=93, D=68, L=9276, C=73).
GeneratorParams table4_rbv1() noexcept;
/// Published optimum for the prognosis dataset (K=47, D=99, L=8941, C=56).
GeneratorParams table4_rbv2() noexcept;

/// Throws Error(kInvalidParameter) unless L > 0 and all fields are finite.
void validate(const GeneratorParams& p);

/// One step of the map. Throws on non-finite x or invalid parameters.
double next_state(double x, const GeneratorParams& p);

/// Streams the map's states starting from p.C.
class ChaoticSequence {
 public:
  explicit ChaoticSequence(const GeneratorParams& p);

  double next();
  double state() const noexcept { return x_; }
  std::size_t steps() const noexcept { return steps_; }

 private:
  GeneratorParams p_;
  double x_;
  std::size_t steps_ = 0;
};

/// The (N+1) x P reservoir. Column j holds W[0..N][j] contiguously, which is
/// the order the generator produces them in. Columns are 0-based here; the
/// first generated column is column 0.
class ReservoirMatrix {
 public:
  ReservoirMatrix() = default;
  ReservoirMatrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  double operator()(std::size_t i, std::size_t j) const { return data_[j * rows_ + i]; }
  double& operator()(std::size_t i, std::size_t j) { return data_[j * rows_ + i]; }

  std::span<const double> column(std::size_t j) const {
    return {data_.data() + j * rows_, rows_};
  }
  std::span<const double> data() const noexcept { return data_; }

  friend bool operator==(const ReservoirMatrix&, const ReservoirMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// Fills W column by column (outer loop over the P outputs, inner loop over
/// the N+1 inputs), one generator step per cell, W = x / L.
ReservoirMatrix fill_reservoir(const GeneratorParams& p, std::size_t n_inputs,
                               std::size_t n_outputs);

/// Regenerates reservoir columns one at a time into a caller-owned buffer of
/// N+1 values, without materializing W.
class ReservoirColumnStream {
 public:
  ReservoirColumnStream(const GeneratorParams& p, std::size_t n_inputs);

  void next_column(std::span<double> out);

 private:
  ChaoticSequence seq_;
  double L_;
  std::size_t rows_;
};

}  // namespace lognnet
