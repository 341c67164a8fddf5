#include "commands.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <CLI11.hpp>

#include "lognnet/error.hpp"
#include "lognnet/selection.hpp"
#include "lognnet/threshold.hpp"
#include "report.hpp"

namespace lognnet::cli {

namespace {

struct RawLists {
  std::string fs, fr, features, epoch_sweep, delimiter = ",";
  double target = -1.0, bin_size = -1.0;
};

void add_dataset_options(CLI::App& cmd, RunOptions& o, RawLists& raw) {
  cmd.add_option("--dataset", o.dataset, "CSV file, one row per sample")->envname("LOGNNET_DATASET");
  cmd.add_option("--registry", o.registry, "Feature registry: rbv1, rbv2 or custom")
      ->check(CLI::IsMember({"rbv1", "rbv2", "custom"}))
      ->envname("LOGNNET_REGISTRY");
  cmd.add_option("--label-column", o.label_column, "Name of the label column")
      ->envname("LOGNNET_LABEL_COLUMN");
  cmd.add_option("--delimiter", raw.delimiter, "CSV field separator")->envname("LOGNNET_DELIMITER");
  cmd.add_flag("!--no-impute", o.impute, "Fail on missing cells instead of mean imputation");
}

void add_model_options(CLI::App& cmd, RunOptions& o, RawLists& raw) {
  cmd.add_option("--shape", o.shape, "N:P:H:M (default: <features>:50:20:2)")
      ->envname("LOGNNET_SHAPE");
  cmd.add_option("--epochs", o.epochs, "Training epochs")->envname("LOGNNET_EPOCHS");
  cmd.add_option("--lr", o.learning_rate, "Learning rate")->envname("LOGNNET_LR");
  cmd.add_option("--folds", o.folds, "Cross-validation folds")->envname("LOGNNET_FOLDS");
  cmd.add_flag("!--no-stratified", o.stratified, "Plain shuffled folds");
  cmd.add_option("--seed", o.seed, "Base seed")->envname("LOGNNET_SEED");
  cmd.add_option("--jobs", o.jobs, "Worker threads")->envname("LOGNNET_JOBS");
  cmd.add_option("--gen", o.gen, "K,D,L,C, table4:rbv1, table4:rbv2 or optimize")
      ->envname("LOGNNET_GEN");
  cmd.add_option("--modulo", o.modulo, "euclidean or truncated")->envname("LOGNNET_MODULO");
  cmd.add_option("--fs", raw.fs, "Selected features, e.g. 19,20")->envname("LOGNNET_FS");
  cmd.add_option("--fr", raw.fr, "Removed features, e.g. 21,37,40")->envname("LOGNNET_FR");
}

void add_pso_options(CLI::App& cmd, RunOptions& o, RawLists& raw) {
  cmd.add_option("--swarm", o.swarm, "Particles")->envname("LOGNNET_SWARM");
  cmd.add_option("--iterations", o.iterations, "Swarm iterations")->envname("LOGNNET_ITERATIONS");
  cmd.add_option("--fitness-epochs", o.fitness_epochs, "Epochs per fitness evaluation")
      ->envname("LOGNNET_FITNESS_EPOCHS");
  cmd.add_option("--target", raw.target, "Stop once this training accuracy is reached")
      ->envname("LOGNNET_TARGET");
}

void add_out_option(CLI::App& cmd, RunOptions& o) {
  cmd.add_option("--out", o.out, "Output directory")->envname("LOGNNET_OUT");
}

Dataset load(const RunOptions& o) {
  if (o.dataset.empty()) throw Error(ErrorCode::kUsage, o.command + " needs --dataset");
  CsvOptions csv;
  csv.delimiter = o.delimiter;
  csv.label_column = o.label_column;
  Dataset ds = [&] {
    if (o.registry == "rbv1") return load_csv(o.dataset, rbv1_registry(), csv);
    if (o.registry == "rbv2") return load_csv(o.dataset, rbv2_registry(), csv);
    if (o.registry == "custom") {
      return load_csv(o.dataset, registry_from_csv_header(o.dataset, csv), csv);
    }
    throw Error(ErrorCode::kUsage, "unknown registry '" + o.registry + "'");
  }();
  if (ds.samples.empty()) throw Error(ErrorCode::kSchema, "dataset has no rows");
  const bool missing = std::any_of(ds.samples.begin(), ds.samples.end(),
                                   [](const Sample& s) { return s.has_missing(); });
  if (missing && o.impute) ds = impute_means(ds);
  return ds;
}

struct Context {
  const RunOptions& o;
  std::ostream& log;
  nlohmann::json manifest;

  std::filesystem::path emit(const nlohmann::json& result) const {
    const auto path = write_output(o.out, report_stem(manifest) + ".json",
                                   make_report(manifest, result).dump(2) + "\n");
    log << "report: " << path.string() << "\n";
    return path;
  }

  void side_file(const std::string& suffix, const std::string& text) const {
    const auto path = write_output(o.out, report_stem(manifest) + suffix, text);
    log << "wrote: " << path.string() << "\n";
  }
};

nlohmann::json base_manifest(const RunOptions& o) {
  return {{"format_version", kManifestFormatVersion},
          {"command", o.command},
          {"dataset", o.dataset},
          {"registry", o.registry},
          {"seed", o.seed},
          {"output_dir", o.out},
          {"options", to_json(o)}};
}

std::string gen_source(const RunOptions& o) {
  if (o.gen == "optimize") return "optimize";
  if (o.gen.empty() || o.gen.rfind("table4:", 0) == 0) return "table4";
  return "explicit";
}

/// Resolves --gen, running the optimizer when asked to. Records the outcome
/// in the manifest.
GeneratorParams resolve_generator(Context& ctx, const Dataset& ds, const NetworkShape& shape,
                                  const FeatureMask& mask, nlohmann::json* pso_out = nullptr) {
  const auto& o = ctx.o;
  GeneratorParams gen;
  if (auto p = parse_generator(o)) {
    gen = *p;
  } else {
    auto r = optimize_reservoir(ds, shape, mask, pso_config(o), train_config(o));
    gen = r.best;
    gen.modulo = parse_modulo(o.modulo);
    if (pso_out) *pso_out = to_json(r);
  }
  ctx.manifest["generator"] = {{"source", gen_source(o)}, {"params", to_json(gen)}};
  return gen;
}

nlohmann::json mask_json(const FeatureMask& m) {
  return {{"fs", m.selected()}, {"fr", m.removed()}, {"nf", m.num_selected()}};
}

std::string fmt6(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::filesystem::path run_cv(Context& ctx) {
  const auto& o = ctx.o;
  const auto ds = load(o);
  const auto shape = resolve_shape(o, ds.num_features());
  const auto mask = resolve_mask(o, ds.num_features());
  ctx.manifest["shape"] = shape.to_string();
  auto cfg = train_config(o);
  nlohmann::json pso = nullptr;
  const auto gen = resolve_generator(ctx, ds, shape, mask, &pso);

  nlohmann::json result = mask_json(mask);
  if (!pso.is_null()) result["optimizer"] = pso;
  if (o.epoch_sweep.empty()) {
    const auto r = kfold_evaluate(ds, shape, gen, mask, cfg);
    result["cv"] = to_json(r);
    ctx.log << "accuracy_pooled=" << fmt6(r.pooled.accuracy)
            << " accuracy_mean_of_folds=" << fmt6(r.mean_fold_accuracy) << "\n";
    return ctx.emit(result);
  }
  std::string csv = "epochs,accuracy_pooled,accuracy_mean_of_folds\n";
  nlohmann::json sweep = nlohmann::json::array();
  for (auto ep : o.epoch_sweep) {
    cfg.epochs = ep;
    const auto r = kfold_evaluate(ds, shape, gen, mask, cfg);
    sweep.push_back({{"epochs", ep}, {"cv", to_json(r)}});
    csv += std::to_string(ep) + "," + fmt6(r.pooled.accuracy) + "," +
           fmt6(r.mean_fold_accuracy) + "\n";
    ctx.log << "epochs=" << ep << " accuracy_pooled=" << fmt6(r.pooled.accuracy) << "\n";
  }
  result["sweep"] = sweep;
  ctx.side_file("-epochs.csv", csv);
  return ctx.emit(result);
}

std::filesystem::path run_subset(Context& ctx) {
  const auto& o = ctx.o;
  const auto ds = load(o);
  const auto shape = resolve_shape(o, ds.num_features());
  const auto mask = resolve_mask(o, ds.num_features());
  ctx.manifest["shape"] = shape.to_string();
  const auto gen = resolve_generator(ctx, ds, shape, mask);
  const double a = evaluate_subset(ds, shape, gen, mask, train_config(o), o.repeats);
  nlohmann::json result = mask_json(mask);
  result["accuracy"] = a;
  result["repeats"] = o.repeats;
  ctx.log << "A" << mask.num_selected() << "=" << fmt6(a) << "\n";
  return ctx.emit(result);
}

std::filesystem::path run_optimize(Context& ctx) {
  const auto& o = ctx.o;
  const auto ds = load(o);
  const auto shape = resolve_shape(o, ds.num_features());
  const auto mask = resolve_mask(o, ds.num_features());
  ctx.manifest["shape"] = shape.to_string();
  auto pso = pso_config(o);
  const auto r = optimize_reservoir(ds, shape, mask, pso, train_config(o));
  ctx.manifest["generator"] = {{"source", "optimize"}, {"params", to_json(r.best)}};
  std::ostringstream csv;
  write_iteration_log_csv(csv, r);
  ctx.side_file("-iterations.csv", csv.str());
  nlohmann::json result = mask_json(mask);
  result["pso"] = to_json(pso);
  result["optimizer"] = to_json(r);
  ctx.log << "K=" << fmt6(r.best.K) << " D=" << fmt6(r.best.D) << " L=" << fmt6(r.best.L)
          << " C=" << fmt6(r.best.C) << " fitness=" << fmt6(r.fitness) << "\n";
  return ctx.emit(result);
}

std::filesystem::path run_select(Context& ctx) {
  const auto& o = ctx.o;
  const auto ds = load(o);
  const auto shape = resolve_shape(o, ds.num_features());
  if (o.fs || o.fr) throw Error(ErrorCode::kUsage, "select always starts from every feature");
  ctx.manifest["shape"] = shape.to_string();
  const auto gen = resolve_generator(ctx, ds, shape, FeatureMask(ds.num_features()));
  SelectionOptions sel;
  sel.repeats = o.repeats;
  sel.jobs = o.jobs;
  auto cfg = train_config(o);
  cfg.jobs = 1;  // parallelism goes to candidate subsets instead
  const auto trace = backward_eliminate(ds, shape, gen, cfg, sel);
  for (std::size_t k = 0; k < trace.iterations.size(); ++k) {
    std::ostringstream csv;
    write_strength_curve_csv(csv, trace.iterations[k].curve);
    ctx.side_file("-dA-" + std::to_string(k + 1) + ".csv", csv.str());
  }
  nlohmann::json result = to_json(trace);
  nlohmann::json names = nlohmann::json::array();
  for (auto z : trace.ranking) names.push_back(ds.registry.name(z));
  result["ranking_names"] = names;
  ctx.log << "removed:";
  for (const auto& it : trace.iterations)
    if (it.removed) ctx.log << " " << *it.removed;
  ctx.log << "\n";
  return ctx.emit(result);
}

std::filesystem::path run_threshold(Context& ctx) {
  const auto ds = load(ctx.o);
  const auto rows = threshold_table(ds);
  std::ostringstream csv;
  write_threshold_table_csv(csv, ds, rows);
  ctx.side_file(".csv", csv.str());
  nlohmann::json table = nlohmann::json::array();
  for (const auto& r : rows) {
    table.push_back({{"index", r.feature},
                     {"feature", ds.registry.name(r.feature)},
                     {"A_th", r.accuracy},
                     {"V_th", r.threshold},
                     {"units", ds.registry.unit(r.feature)},
                     {"type", r.type},
                     {"min", r.min},
                     {"max", r.max},
                     {"degenerate", r.degenerate}});
  }
  if (!rows.empty()) {
    ctx.log << "best: " << ds.registry.name(rows[0].feature) << " A_th=" << fmt6(rows[0].accuracy)
            << " V_th=" << fmt6(rows[0].threshold) << " type=" << rows[0].type << "\n";
  }
  return ctx.emit({{"rows", table}});
}

std::filesystem::path run_hist(Context& ctx) {
  const auto& o = ctx.o;
  const auto ds = load(o);
  std::vector<std::size_t> features = o.features;
  if (features.empty()) {
    for (std::size_t z = 1; z <= ds.num_features(); ++z)
      if (o.bin_size || published_bin_size(ds.registry, z)) features.push_back(z);
  }
  if (features.empty()) {
    throw Error(ErrorCode::kUsage, "no published bin sizes for this registry; pass --feature "
                                   "and --bin-size");
  }
  nlohmann::json out = nlohmann::json::array();
  for (auto z : features) {
    if (z < 1 || z > ds.num_features()) {
      throw Error(ErrorCode::kUsage, "--feature " + std::to_string(z) + " is out of range");
    }
    const auto b = o.bin_size ? o.bin_size : published_bin_size(ds.registry, z);
    if (!b) {
      throw Error(ErrorCode::kUsage, "feature " + std::to_string(z) + " (" +
                                         ds.registry.name(z) + ") has no published bin size; "
                                         "pass --bin-size");
    }
    const auto h = class_histogram(ds, {z, *b, std::nullopt});
    std::ostringstream csv;
    write_histogram_csv(csv, ds, h);
    ctx.side_file("-hist-" + std::to_string(z) + ".csv", csv.str());
    out.push_back({{"feature", z},
                   {"name", ds.registry.name(z)},
                   {"bin_size", *b},
                   {"bins", h.lower_edges.size()}});
  }
  return ctx.emit({{"histograms", out}});
}

std::filesystem::path run_footprint(Context& ctx) {
  const auto& o = ctx.o;
  const auto shape = NetworkShape::parse(o.shape.empty() ? "51:50:20:2" : o.shape);
  ctx.manifest["shape"] = shape.to_string();
  const auto f = estimate_footprint(shape, o.bytes, o.ram_saving);
  ctx.log << "reservoir_bytes=" << f.reservoir << " classifier_bytes=" << f.classifier
          << " buffer_bytes=" << f.buffers << " total_bytes=" << f.total << "\n";
  return ctx.emit({{"shape", shape.to_string()},
                   {"bytes_per_weight", o.bytes},
                   {"ram_saving", o.ram_saving},
                   {"reservoir_bytes", f.reservoir},
                   {"classifier_bytes", f.classifier},
                   {"buffer_bytes", f.buffers},
                   {"total_bytes", f.total}});
}

nlohmann::json read_report(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open '" + path + "'");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kFormat, "'" + path + "' is not JSON: " + e.what());
  }
}

}  // namespace

bool parse_command_line(const std::vector<std::string>& args, RunOptions& o, std::ostream& help) {
  CLI::App app{"LogNNet reservoir classifier experiments", "lognnet"};
  app.require_subcommand(1);
  RawLists raw;

  auto* cv = app.add_subcommand("cv", "K-fold cross-validated metrics");
  add_dataset_options(*cv, o, raw);
  add_model_options(*cv, o, raw);
  add_pso_options(*cv, o, raw);
  cv->add_option("--sweep-epochs", raw.epoch_sweep, "Comma list of epoch counts to compare");
  add_out_option(*cv, o);

  auto* subset = app.add_subcommand("subset", "Accuracy of one feature subset");
  add_dataset_options(*subset, o, raw);
  add_model_options(*subset, o, raw);
  add_pso_options(*subset, o, raw);
  subset->add_option("--repeats", o.repeats, "Evaluations averaged")->envname("LOGNNET_REPEATS");
  add_out_option(*subset, o);

  auto* optimize = app.add_subcommand("optimize", "Particle swarm search for K, D, L, C");
  add_dataset_options(*optimize, o, raw);
  add_model_options(*optimize, o, raw);
  add_pso_options(*optimize, o, raw);
  add_out_option(*optimize, o);

  auto* select = app.add_subcommand("select", "Backward feature elimination");
  add_dataset_options(*select, o, raw);
  add_model_options(*select, o, raw);
  add_pso_options(*select, o, raw);
  select->add_option("--repeats", o.repeats, "Evaluations averaged per subset")
      ->envname("LOGNNET_REPEATS");
  add_out_option(*select, o);

  auto* threshold = app.add_subcommand("threshold", "Single-feature threshold table");
  add_dataset_options(*threshold, o, raw);
  add_out_option(*threshold, o);

  auto* hist = app.add_subcommand("hist", "Per-class histograms");
  add_dataset_options(*hist, o, raw);
  hist->add_option("--feature", raw.features, "Comma list of features (default: all with a "
                                              "published bin size)");
  hist->add_option("--bin-size", raw.bin_size, "Bin width in feature units");
  add_out_option(*hist, o);

  auto* footprint = app.add_subcommand("footprint", "Device RAM estimate");
  footprint->add_option("--shape", o.shape, "N:P:H:M")->envname("LOGNNET_SHAPE");
  footprint->add_option("--bytes", o.bytes, "Bytes per stored number")->envname("LOGNNET_BYTES");
  footprint->add_flag("--ram-saving", o.ram_saving, "Regenerate reservoir columns on the fly");
  add_out_option(*footprint, o);

  std::string replay_path, replay_out;
  auto* replay = app.add_subcommand("replay", "Re-run the command recorded in a report");
  replay->add_option("report", replay_path, "Report JSON")->required();
  replay->add_option("--out", replay_out, "Output directory (default: as recorded)");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    help << app.help();
    return false;
  } catch (const CLI::CallForAllHelp&) {
    help << app.help("", CLI::AppFormatMode::All);
    return false;
  } catch (const CLI::ParseError& e) {
    std::string msg = e.what();
    std::replace(msg.begin(), msg.end(), '\n', ' ');
    throw Error(ErrorCode::kUsage, msg);
  }

  if (replay->parsed()) {
    const auto report = read_report(replay_path);
    if (!report.contains("manifest") || !report["manifest"].contains("options")) {
      throw Error(ErrorCode::kFormat, "'" + replay_path + "' has no run manifest");
    }
    o = options_from_json(report["manifest"]["options"]);
    if (!replay_out.empty()) o.out = replay_out;
    return true;
  }

  o.command = app.get_subcommands().front()->get_name();
  if (raw.delimiter.size() != 1) throw Error(ErrorCode::kUsage, "--delimiter must be one character");
  o.delimiter = raw.delimiter[0];
  if (subset->parsed() && !subset->get_option("--fs")->empty() && raw.fs.empty()) {
    throw Error(ErrorCode::kUsage, "--fs list is empty");
  }
  for (auto* cmd : {cv, subset, optimize, select}) {
    if (!cmd->parsed()) continue;
    if (cmd->count("--fs") > 0 || !raw.fs.empty()) o.fs = parse_index_list(raw.fs, "--fs");
    if (cmd->count("--fr") > 0 || !raw.fr.empty()) o.fr = parse_index_list(raw.fr, "--fr");
    if (raw.target >= 0.0) o.target = raw.target;
  }
  if (!raw.epoch_sweep.empty()) o.epoch_sweep = parse_index_list(raw.epoch_sweep, "--sweep-epochs");
  if (!raw.features.empty()) o.features = parse_index_list(raw.features, "--feature");
  if (raw.bin_size > 0.0) o.bin_size = raw.bin_size;
  if (hist->parsed() && hist->count("--bin-size") > 0 && !(raw.bin_size > 0.0)) {
    throw Error(ErrorCode::kUsage, "--bin-size must be positive");
  }
  return true;
}

std::filesystem::path execute(const RunOptions& o, std::ostream& log) {
  Context ctx{o, log, base_manifest(o)};
  if (o.command == "cv") return run_cv(ctx);
  if (o.command == "subset") return run_subset(ctx);
  if (o.command == "optimize") return run_optimize(ctx);
  if (o.command == "select") return run_select(ctx);
  if (o.command == "threshold") return run_threshold(ctx);
  if (o.command == "hist") return run_hist(ctx);
  if (o.command == "footprint") return run_footprint(ctx);
  throw Error(ErrorCode::kUsage, "unknown command '" + o.command + "'");
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  try {
    RunOptions o;
    if (!parse_command_line(args, o, out)) return 0;
    execute(o, out);
    return 0;
  } catch (const Error& e) {
    std::string msg = e.what();
    std::replace(msg.begin(), msg.end(), '\n', ' ');
    err << "error: code=" << error_code_name(e.code()) << " message=" << msg << "\n";
    return static_cast<int>(e.code());
  } catch (const std::exception& e) {
    err << "error: code=internal message=" << e.what() << "\n";
    return 1;
  }
}

}  // namespace lognnet::cli
