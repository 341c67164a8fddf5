#include "lognnet/chaos.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "lognnet/error.hpp"

namespace lognnet {

std::string_view error_code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::kUsage: return "usage";
    case ErrorCode::kInvalidParameter: return "invalid_parameter";
    case ErrorCode::kSchema: return "schema";
    case ErrorCode::kParse: return "parse";
    case ErrorCode::kLabel: return "label";
    case ErrorCode::kImputation: return "imputation";
    case ErrorCode::kShape: return "shape";
    case ErrorCode::kBalancing: return "balancing";
    case ErrorCode::kFold: return "fold";
    case ErrorCode::kIo: return "io";
    case ErrorCode::kFormat: return "format";
  }
  return "unknown";
}

bool GeneratorBounds::contains(const GeneratorParams& p) const noexcept {
  return p.K >= K_lo && p.K <= K_hi && p.D >= D_lo && p.D <= D_hi && p.L >= L_lo &&
         p.L <= L_hi && p.C >= C_lo && p.C <= C_hi;
}

GeneratorParams table4_rbv1() noexcept { return {93.0, 68.0, 9276.0, 73.0}; }
GeneratorParams table4_rbv2() noexcept { return {47.0, 99.0, 8941.0, 56.0}; }

void validate(const GeneratorParams& p) {
  if (!std::isfinite(p.K) || !std::isfinite(p.D) || !std::isfinite(p.L) ||
      !std::isfinite(p.C)) {
    throw Error(ErrorCode::kInvalidParameter, "generator parameters must be finite");
  }
  if (!(p.L > 0.0)) {
    throw Error(ErrorCode::kInvalidParameter,
                "generator modulus L must be positive, got " + std::to_string(p.L));
  }
}

namespace {

double reduce(double v, double L, ModuloConvention convention) {
  // fmod is exact, so for integer-valued inputs both conventions are exact.
  double r = std::fmod(v, L);
  if (convention == ModuloConvention::kEuclidean && r < 0.0) {
    r += L;
    // A tiny negative remainder can round up to exactly L.
    if (r >= L) r = std::nextafter(L, 0.0);
  }
  return r;
}

double step_unchecked(double x, const GeneratorParams& p) {
  return reduce(p.D - p.K * x, p.L, p.modulo);
}

}  // namespace

double next_state(double x, const GeneratorParams& p) {
  validate(p);
  if (!std::isfinite(x)) {
    throw Error(ErrorCode::kInvalidParameter, "generator state must be finite");
  }
  return step_unchecked(x, p);
}

ChaoticSequence::ChaoticSequence(const GeneratorParams& p) : p_(p), x_(p.C) { validate(p); }

double ChaoticSequence::next() {
  x_ = step_unchecked(x_, p_);
  ++steps_;
  return x_;
}

ReservoirMatrix fill_reservoir(const GeneratorParams& p, std::size_t n_inputs,
                               std::size_t n_outputs) {
  if (n_inputs < 1 || n_outputs < 1) {
    throw Error(ErrorCode::kInvalidParameter, "reservoir needs N >= 1 and P >= 1");
  }
  ChaoticSequence seq(p);
  ReservoirMatrix w(n_inputs + 1, n_outputs);
  for (std::size_t j = 0; j < n_outputs; ++j) {
    for (std::size_t i = 0; i <= n_inputs; ++i) {
      w(i, j) = seq.next() / p.L;
    }
  }
  return w;
}

ReservoirColumnStream::ReservoirColumnStream(const GeneratorParams& p, std::size_t n_inputs)
    : seq_(p), L_(p.L), rows_(n_inputs + 1) {}

void ReservoirColumnStream::next_column(std::span<double> out) {
  if (out.size() != rows_) {
    throw Error(ErrorCode::kShape, "column buffer must hold N+1 values");
  }
  for (auto& v : out) v = seq_.next() / L_;
}

}  // namespace lognnet
