#include "lognnet/network.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <nlohmann/json.hpp>

#include "lognnet/detail/rng.hpp"
#include "lognnet/error.hpp"

namespace lognnet {

void NetworkShape::validate() const {
  if (N < 1 || P < 1 || H < 1 || M < 1) {
    throw Error(ErrorCode::kShape, "network shape " + to_string() + " must be all >= 1");
  }
}

std::string NetworkShape::to_string() const {
  return std::to_string(N) + ":" + std::to_string(P) + ":" + std::to_string(H) + ":" +
         std::to_string(M);
}

NetworkShape NetworkShape::parse(const std::string& text) {
  std::vector<std::size_t> parts;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ':')) {
    try {
      std::size_t used = 0;
      const long long v = std::stoll(tok, &used);
      if (used != tok.size() || v < 1) throw std::invalid_argument(tok);
      parts.push_back(static_cast<std::size_t>(v));
    } catch (const std::exception&) {
      throw Error(ErrorCode::kUsage, "bad shape '" + text + "', expected N:P:H:M");
    }
  }
  if (parts.size() != 4) throw Error(ErrorCode::kUsage, "bad shape '" + text + "', expected N:P:H:M");
  return {parts[0], parts[1], parts[2], parts[3]};
}

void LogNNetModel::materialize() {
  if (!reservoir) reservoir = fill_reservoir(gen, shape.N, shape.P);
}

LogNNetModel init_model(const NetworkShape& shape, const GeneratorParams& gen,
                        std::vector<double> divisors, std::uint64_t seed,
                        bool materialize_reservoir) {
  shape.validate();
  validate(gen);
  if (divisors.size() != shape.N) {
    throw Error(ErrorCode::kShape, "expected " + std::to_string(shape.N) + " divisors, got " +
                                       std::to_string(divisors.size()));
  }
  for (double d : divisors) {
    if (!(d > 0.0) || !std::isfinite(d)) {
      throw Error(ErrorCode::kInvalidParameter, "normalization divisors must be positive");
    }
  }

  LogNNetModel model;
  model.shape = shape;
  model.gen = gen;
  model.divisors = std::move(divisors);
  if (materialize_reservoir) model.materialize();

  detail::Rng rng(seed);
  model.weights.hidden = Matrix(shape.H, shape.P + 1);
  model.weights.output = Matrix(shape.M, shape.H + 1);
  for (auto& w : model.weights.hidden.data) w = rng.uniform(-0.5, 0.5);
  for (auto& w : model.weights.output.data) w = rng.uniform(-0.5, 0.5);
  return model;
}

namespace {

void check_input(const LogNNetModel& model, std::span<const double> d) {
  if (d.size() != model.shape.N) {
    throw Error(ErrorCode::kShape, "input has " + std::to_string(d.size()) +
                                       " features, model expects " +
                                       std::to_string(model.shape.N));
  }
}

void project(const LogNNetModel& model, std::span<const double> y, std::vector<double>& s_prime) {
  const std::size_t P = model.shape.P;
  s_prime.assign(P, 0.0);
  if (model.reservoir) {
    const auto& w = *model.reservoir;
    for (std::size_t j = 0; j < P; ++j) {
      const auto col = w.column(j);
      double acc = 0.0;
      for (std::size_t i = 0; i < col.size(); ++i) acc += col[i] * y[i];
      s_prime[j] = acc;
    }
  } else {
    ReservoirColumnStream stream(model.gen, model.shape.N);
    std::vector<double> col(model.shape.N + 1);
    for (std::size_t j = 0; j < P; ++j) {
      stream.next_column(col);
      double acc = 0.0;
      for (std::size_t i = 0; i < col.size(); ++i) acc += col[i] * y[i];
      s_prime[j] = acc;
    }
  }
}

void normalize_reservoir_output(std::span<const double> s_prime, std::vector<double>& s_h) {
  double scale = 0.0;
  for (double v : s_prime) scale = std::max(scale, std::abs(v));
  if (scale == 0.0) scale = 1.0;
  s_h.resize(s_prime.size() + 1);
  s_h[0] = 1.0;
  for (std::size_t j = 0; j < s_prime.size(); ++j) s_h[j + 1] = s_prime[j] / scale;
}

void build_y(const LogNNetModel& model, std::span<const double> d, std::vector<double>& y) {
  y.resize(d.size() + 1);
  y[0] = 1.0;
  for (std::size_t i = 0; i < d.size(); ++i) y[i + 1] = d[i] / model.divisors[i];
}

}  // namespace

void head_forward(const ClassifierWeights& w, std::span<const double> s_h,
                  std::vector<double>& s_h2, std::vector<double>& s_out) {
  const std::size_t H = w.hidden.rows;
  const std::size_t M = w.output.rows;
  s_h2.resize(H);
  for (std::size_t h = 0; h < H; ++h) {
    const double* row = &w.hidden.data[h * w.hidden.cols];
    double z = 0.0;
    for (std::size_t k = 0; k < s_h.size(); ++k) z += row[k] * s_h[k];
    s_h2[h] = 1.0 / (1.0 + std::exp(-z));
  }
  s_out.resize(M);
  double zmax = -std::numeric_limits<double>::infinity();
  for (std::size_t m = 0; m < M; ++m) {
    const double* row = &w.output.data[m * w.output.cols];
    double z = row[0];
    for (std::size_t h = 0; h < H; ++h) z += row[h + 1] * s_h2[h];
    s_out[m] = z;
    zmax = std::max(zmax, z);
  }
  double total = 0.0;
  for (auto& v : s_out) {
    v = std::exp(v - zmax);
    total += v;
  }
  for (auto& v : s_out) v /= total;
}

std::vector<double> reservoir_features(const LogNNetModel& model, std::span<const double> d) {
  check_input(model, d);
  std::vector<double> y, s_prime, s_h;
  build_y(model, d, y);
  project(model, y, s_prime);
  normalize_reservoir_output(s_prime, s_h);
  return s_h;
}

ForwardTrace forward(const LogNNetModel& model, std::span<const double> d) {
  check_input(model, d);
  ForwardTrace t;
  build_y(model, d, t.Y);
  project(model, t.Y, t.S_prime);
  normalize_reservoir_output(t.S_prime, t.S_h);
  head_forward(model.weights, t.S_h, t.S_h2, t.S_out);
  return t;
}

std::size_t argmax(std::span<const double> probs) {
  std::size_t best = 0;
  for (std::size_t m = 1; m < probs.size(); ++m) {
    if (probs[m] > probs[best]) best = m;
  }
  return best;
}

std::size_t predict(const LogNNetModel& model, std::span<const double> d) {
  return argmax(forward(model, d).S_out);
}

FootprintBreakdown estimate_footprint(const NetworkShape& shape, std::size_t bytes_per_weight,
                                      bool ram_saving) {
  shape.validate();
  if (bytes_per_weight < 1) {
    throw Error(ErrorCode::kInvalidParameter, "bytes per weight must be >= 1");
  }
  const auto [N, P, H, M] = shape;
  FootprintBreakdown f;
  f.reservoir = (ram_saving ? (N + 1) : (N + 1) * P) * bytes_per_weight;
  f.classifier = (H * (P + 1) + M * (H + 1)) * bytes_per_weight;
  // Y, S_h, [1; S_h2] and S_out.
  f.buffers = ((N + 1) + (P + 1) + (H + 1) + M) * bytes_per_weight;
  f.total = f.reservoir + f.classifier + f.buffers;
  return f;
}

namespace {

nlohmann::json matrix_to_json(const Matrix& m) {
  return {{"rows", m.rows}, {"cols", m.cols}, {"data", m.data}};
}

Matrix matrix_from_json(const nlohmann::json& j, std::size_t rows, std::size_t cols,
                        const char* what) {
  Matrix m;
  m.rows = j.at("rows").get<std::size_t>();
  m.cols = j.at("cols").get<std::size_t>();
  m.data = j.at("data").get<std::vector<double>>();
  if (m.rows != rows || m.cols != cols || m.data.size() != rows * cols) {
    throw Error(ErrorCode::kFormat, std::string(what) + " matrix has the wrong dimensions");
  }
  return m;
}

}  // namespace

nlohmann::json to_json(const GeneratorParams& p) {
  return {{"K", p.K},
          {"D", p.D},
          {"L", p.L},
          {"C", p.C},
          {"modulo", p.modulo == ModuloConvention::kEuclidean ? "euclidean" : "truncated"}};
}

GeneratorParams generator_from_json(const nlohmann::json& j) {
  GeneratorParams p{j.at("K").get<double>(), j.at("D").get<double>(), j.at("L").get<double>(),
                    j.at("C").get<double>()};
  const auto modulo = j.value("modulo", std::string("euclidean"));
  if (modulo == "truncated") {
    p.modulo = ModuloConvention::kTruncated;
  } else if (modulo != "euclidean") {
    throw Error(ErrorCode::kFormat, "unknown modulo convention '" + modulo + "'");
  }
  validate(p);
  return p;
}

nlohmann::json model_to_json(const LogNNetModel& model) {
  const auto& s = model.shape;
  return {{"format", "lognnet-model"},
          {"format_version", kModelFormatVersion},
          {"shape", {{"N", s.N}, {"P", s.P}, {"H", s.H}, {"M", s.M}}},
          {"generator", to_json(model.gen)},
          {"divisors", model.divisors},
          {"hidden_weights", matrix_to_json(model.weights.hidden)},
          {"output_weights", matrix_to_json(model.weights.output)}};
}

LogNNetModel model_from_json(const nlohmann::json& j) {
  try {
    if (j.at("format").get<std::string>() != "lognnet-model") {
      throw Error(ErrorCode::kFormat, "not a lognnet model document");
    }
    const int version = j.at("format_version").get<int>();
    if (version != kModelFormatVersion) {
      throw Error(ErrorCode::kFormat, "unsupported model format version " + std::to_string(version));
    }
    LogNNetModel model;
    const auto& s = j.at("shape");
    model.shape = {s.at("N").get<std::size_t>(), s.at("P").get<std::size_t>(),
                   s.at("H").get<std::size_t>(), s.at("M").get<std::size_t>()};
    model.shape.validate();
    model.gen = generator_from_json(j.at("generator"));
    model.divisors = j.at("divisors").get<std::vector<double>>();
    if (model.divisors.size() != model.shape.N) {
      throw Error(ErrorCode::kFormat, "divisor count does not match N");
    }
    model.weights.hidden =
        matrix_from_json(j.at("hidden_weights"), model.shape.H, model.shape.P + 1, "hidden");
    model.weights.output =
        matrix_from_json(j.at("output_weights"), model.shape.M, model.shape.H + 1, "output");
    model.materialize();
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kFormat, std::string("malformed model document: ") + e.what());
  }
}

}  // namespace lognnet
