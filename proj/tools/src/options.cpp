#include "options.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

#include "lognnet/error.hpp"

namespace lognnet::cli {

namespace {

template <typename T>
std::optional<T> opt_from(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<T>();
}

template <typename T>
nlohmann::json opt_to(const std::optional<T>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json();
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  std::istringstream in(text);
  while (std::getline(in, cur, sep)) parts.push_back(cur);
  if (!text.empty() && text.back() == sep) parts.emplace_back();
  return parts;
}

}  // namespace

nlohmann::json to_json(const RunOptions& o) {
  return {{"command", o.command},
          {"dataset", o.dataset},
          {"registry", o.registry},
          {"label_column", o.label_column},
          {"delimiter", std::string(1, o.delimiter)},
          {"impute", o.impute},
          {"shape", o.shape},
          {"epochs", o.epochs},
          {"epoch_sweep", o.epoch_sweep},
          {"learning_rate", o.learning_rate},
          {"folds", o.folds},
          {"stratified", o.stratified},
          {"seed", o.seed},
          {"jobs", o.jobs},
          {"gen", o.gen},
          {"modulo", o.modulo},
          {"fs", opt_to(o.fs)},
          {"fr", opt_to(o.fr)},
          {"swarm", o.swarm},
          {"iterations", o.iterations},
          {"fitness_epochs", o.fitness_epochs},
          {"target", opt_to(o.target)},
          {"repeats", o.repeats},
          {"features", o.features},
          {"bin_size", opt_to(o.bin_size)},
          {"bytes", o.bytes},
          {"ram_saving", o.ram_saving},
          {"output_dir", o.out}};
}

RunOptions options_from_json(const nlohmann::json& j) {
  try {
    RunOptions o;
    o.command = j.at("command").get<std::string>();
    o.dataset = j.at("dataset").get<std::string>();
    o.registry = j.at("registry").get<std::string>();
    o.label_column = j.at("label_column").get<std::string>();
    const auto delim = j.at("delimiter").get<std::string>();
    if (delim.size() != 1) throw Error(ErrorCode::kFormat, "delimiter must be one character");
    o.delimiter = delim[0];
    o.impute = j.at("impute").get<bool>();
    o.shape = j.at("shape").get<std::string>();
    o.epochs = j.at("epochs").get<std::size_t>();
    o.epoch_sweep = j.at("epoch_sweep").get<std::vector<std::size_t>>();
    o.learning_rate = j.at("learning_rate").get<double>();
    o.folds = j.at("folds").get<std::size_t>();
    o.stratified = j.at("stratified").get<bool>();
    o.seed = j.at("seed").get<std::uint64_t>();
    o.jobs = j.at("jobs").get<unsigned>();
    o.gen = j.at("gen").get<std::string>();
    o.modulo = j.at("modulo").get<std::string>();
    o.fs = opt_from<std::vector<std::size_t>>(j, "fs");
    o.fr = opt_from<std::vector<std::size_t>>(j, "fr");
    o.swarm = j.at("swarm").get<std::size_t>();
    o.iterations = j.at("iterations").get<std::size_t>();
    o.fitness_epochs = j.at("fitness_epochs").get<std::size_t>();
    o.target = opt_from<double>(j, "target");
    o.repeats = j.at("repeats").get<std::size_t>();
    o.features = j.at("features").get<std::vector<std::size_t>>();
    o.bin_size = opt_from<double>(j, "bin_size");
    o.bytes = j.at("bytes").get<std::size_t>();
    o.ram_saving = j.at("ram_saving").get<bool>();
    o.out = j.at("output_dir").get<std::string>();
    return o;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kFormat, std::string("malformed run manifest: ") + e.what());
  }
}

std::vector<std::size_t> parse_index_list(const std::string& text, const char* flag) {
  std::vector<std::size_t> out;
  for (const auto& part : split(text, ',')) {
    std::size_t v = 0;
    const auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), v);
    if (part.empty() || ec != std::errc{} || ptr != part.data() + part.size() || v == 0) {
      throw Error(ErrorCode::kUsage, std::string(flag) + " expects a comma list of feature "
                                         "indices starting at 1, got '" + text + "'");
    }
    out.push_back(v);
  }
  if (out.empty()) throw Error(ErrorCode::kUsage, std::string(flag) + " list is empty");
  return out;
}

ModuloConvention parse_modulo(const std::string& text) {
  if (text == "euclidean") return ModuloConvention::kEuclidean;
  if (text == "truncated") return ModuloConvention::kTruncated;
  throw Error(ErrorCode::kUsage, "--modulo must be euclidean or truncated, got '" + text + "'");
}

std::optional<GeneratorParams> parse_generator(const RunOptions& o) {
  std::string spec = o.gen;
  if (spec.empty()) spec = o.registry == "rbv2" ? "table4:rbv2" : "table4:rbv1";
  if (spec == "optimize") return std::nullopt;

  GeneratorParams p;
  if (spec == "table4:rbv1") {
    p = table4_rbv1();
  } else if (spec == "table4:rbv2") {
    p = table4_rbv2();
  } else {
    const auto parts = split(spec, ',');
    if (parts.size() != 4) {
      throw Error(ErrorCode::kUsage, "--gen expects K,D,L,C, table4:rbv1, table4:rbv2 or "
                                     "optimize, got '" + spec + "'");
    }
    double v[4];
    for (int i = 0; i < 4; ++i) {
      const auto& s = parts[static_cast<std::size_t>(i)];
      const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v[i]);
      if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size()) {
        throw Error(ErrorCode::kUsage, "--gen component '" + s + "' is not a number");
      }
    }
    p = {v[0], v[1], v[2], v[3]};
  }
  p.modulo = parse_modulo(o.modulo);
  validate(p);
  return p;
}

NetworkShape resolve_shape(const RunOptions& o, std::size_t num_features) {
  NetworkShape s{num_features, 50, 20, 2};
  if (!o.shape.empty()) s = NetworkShape::parse(o.shape);
  s.validate();
  if (s.N != num_features) {
    throw Error(ErrorCode::kShape, "shape " + s.to_string() + " needs " + std::to_string(s.N) +
                                       " inputs but the dataset has " +
                                       std::to_string(num_features) + " features");
  }
  return s;
}

TrainConfig train_config(const RunOptions& o) {
  TrainConfig c;
  c.epochs = o.epochs;
  c.learning_rate = o.learning_rate;
  c.seed = o.seed;
  c.folds = o.folds;
  c.stratified = o.stratified;
  c.jobs = o.jobs;
  c.validate();
  return c;
}

PsoConfig pso_config(const RunOptions& o) {
  PsoConfig c;
  c.swarm_size = o.swarm;
  c.iterations = o.iterations;
  c.fitness_epochs = o.fitness_epochs;
  c.target_accuracy = o.target;
  c.seed = o.seed;
  c.jobs = o.jobs;
  c.validate();
  return c;
}

FeatureMask resolve_mask(const RunOptions& o, std::size_t num_features) {
  if (o.fs && o.fr) throw Error(ErrorCode::kUsage, "--fs and --fr are mutually exclusive");
  if (o.fs) return FeatureMask::from_selected(num_features, *o.fs);
  if (o.fr) {
    auto m = FeatureMask::from_removed(num_features, *o.fr);
    if (m.num_selected() == 0) throw Error(ErrorCode::kUsage, "--fr removes every feature");
    return m;
  }
  return FeatureMask(num_features);
}

}  // namespace lognnet::cli
