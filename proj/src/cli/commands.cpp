#include "hdc/cli/commands.hpp"

#include <cmath>
#include <fstream>
#include <ostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hdc/cascade_gradcheck.hpp"
#include "hdc/checkpoint.hpp"
#include "hdc/data.hpp"
#include "hdc/error.hpp"
#include "hdc/eval.hpp"
#include "hdc/gradcheck.hpp"
#include "hdc/mining.hpp"
#include "hdc/random.hpp"
#include "hdc/text.hpp"
#include "hdc/trainer.hpp"

namespace hdc::cli {
namespace fs = std::filesystem;
namespace {

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
}

std::ofstream open_out(const fs::path& path, std::ios::openmode mode = std::ios::out) {
  std::ofstream f(path, mode | std::ios::trunc);
  if (!f) throw IoError("cannot open " + path.string() + " for writing");
  return f;
}

void finish(std::ofstream& f, const fs::path& path) {
  f.flush();
  if (!f) throw IoError("failed writing " + path.string());
}

void write_resolved_config(const RunConfig& config) {
  ensure_dir(config.output_dir);
  const auto path = config.output_dir / "resolved_config.yaml";
  auto f = open_out(path);
  f << emit_run_config(config);
  finish(f, path);
}

Dataset load_source(const RunConfig& config) {
  if (!config.data.path.empty()) return load_csv(config.data.path);
  return synth_clusters(config.data.synth);
}

bool uses_split(const RunConfig& config) { return config.data.train_fraction < 1.0; }

Dataset training_split(const RunConfig& config) {
  Dataset all = load_source(config);
  if (!uses_split(config)) return all;
  return split_per_class(all, config.data.train_fraction, config.data.split_seed).first;
}

Dataset evaluation_split(const RunConfig& config) {
  Dataset all = load_source(config);
  if (!uses_split(config)) return all;
  return split_per_class(all, config.data.train_fraction, config.data.split_seed).second;
}

fs::path checkpoint_path(const RunConfig& config, const CommandOptions& options) {
  return options.checkpoint.value_or(config.output_dir / "model.ckpt");
}

/// 0-based level from a 1-based option, validated against the model.
std::optional<std::size_t> resolve_level(const CascadeModel& model, const CommandOptions& options) {
  if (!options.level) return std::nullopt;
  if (*options.level == 0 || *options.level > model.config.levels()) {
    throw ConfigError("--level must lie in 1.." + std::to_string(model.config.levels()));
  }
  return *options.level - 1;
}

std::string level_suffix(const std::optional<std::size_t>& level) {
  return level ? "_level" + std::to_string(*level + 1) : "";
}

double bin_upper(const CascadeModel& model, const std::optional<std::size_t>& level) {
  return level ? 2.0 : 2.0 * std::sqrt(static_cast<double>(model.config.levels()));
}

Matrix descriptors_for(const CascadeModel& model, const Dataset& data,
                       const std::optional<std::size_t>& level) {
  if (data.dim() != model.config.input_dim) {
    throw DimensionError("data has " + std::to_string(data.dim()) +
                         " features but the checkpoint expects " +
                         std::to_string(model.config.input_dim));
  }
  return extract_descriptor(model, data.features(), level);
}

}  // namespace

int cmd_synth(const RunConfig& config, const CommandOptions& options, std::ostream& out) {
  const Dataset data = synth_clusters(config.data.synth);
  fs::path path = options.out.value_or(config.output_dir / "synth.csv");
  if (!options.out) ensure_dir(config.output_dir);
  save_csv(data, path);
  out << "wrote " << path.string() << ": " << data.num_classes() << " classes, " << data.size()
      << " points, dim " << data.dim() << '\n';
  return kSuccess;
}

int cmd_train(const RunConfig& config, std::ostream& out) {
  config.cascade.validate();
  config.train.validate();
  config.sampler.validate();
  const Dataset data = training_split(config);
  write_resolved_config(config);

  const auto log_path = config.output_dir / "train_log.csv";
  auto log = open_out(log_path);
  const auto levels = logged_levels(config.train.mode, config.cascade.levels());
  write_log_header(log, levels, config.log_wall_time);

  TrainHooks hooks;
  hooks.on_iteration = [&](const IterationRecord& r) {
    write_log_record(log, r, config.log_wall_time);
  };
  hooks.on_checkpoint = [&](const CascadeModel& m, std::size_t done) {
    save_checkpoint(m, config.output_dir / ("model_iter" + std::to_string(done) + ".ckpt"));
  };

  TrainResult result;
  try {
    result = train(init_model(config.cascade), data, config.train, config.sampler, hooks);
  } catch (const TrainingAbortedError& e) {
    write_log_record(log, e.record(), config.log_wall_time);
    finish(log, log_path);
    throw;
  }
  finish(log, log_path);
  const auto ckpt = config.output_dir / "model.ckpt";
  save_checkpoint(result.model, ckpt);

  const auto& last = result.log.records.back();
  out << "trained " << to_string(config.train.mode) << " for " << result.log.records.size()
      << " iterations on " << data.size() << " rows\n";
  for (std::size_t i = 0; i < last.levels.size(); ++i) {
    out << "  level " << last.levels[i] + 1 << ": mean loss " << last.mean_loss[i] << ", |P|="
        << last.positives[i] << ", |N|=" << last.negatives[i] << '\n';
  }
  out << "checkpoint: " << ckpt.string() << '\n';
  return kSuccess;
}

int cmd_eval(const RunConfig& config, const CommandOptions& options, std::ostream& out) {
  const CascadeModel model = load_checkpoint(checkpoint_path(config, options));
  const auto level = resolve_level(model, options);
  const Dataset data = evaluation_split(config);
  const Matrix desc = descriptors_for(model, data, level);

  EvalOptions eo;
  eo.ks = config.eval.recall_at;
  eo.bin_count = config.eval.bin_count;
  eo.bin_hi = bin_upper(model, level);
  eo.workers = config.train.workers;
  const EvalReport report = evaluate(desc, data.labels(), eo);

  ensure_dir(config.output_dir);
  const std::string suffix = level_suffix(level);
  const auto report_path = config.output_dir / ("eval_report" + suffix + ".txt");
  const auto recall_path = config.output_dir / ("eval_recall" + suffix + ".csv");
  const auto hist_path = config.output_dir / ("eval_histogram" + suffix + ".csv");
  auto rf = open_out(report_path);
  write_report_text(rf, report);
  finish(rf, report_path);
  auto cf = open_out(recall_path);
  write_recall_csv(cf, report);
  finish(cf, recall_path);
  auto hf = open_out(hist_path);
  write_histogram_csv(hf, report.histogram);
  finish(hf, hist_path);

  out << (level ? "level " + std::to_string(*level + 1) : std::string("concatenated descriptor"))
      << " on " << data.size() << " items\n";
  write_report_text(out, report);
  return kSuccess;
}

int cmd_embed(const RunConfig& config, const CommandOptions& options, std::ostream& out) {
  const CascadeModel model = load_checkpoint(checkpoint_path(config, options));
  const auto level = resolve_level(model, options);
  const Dataset data = evaluation_split(config);
  const Matrix desc = descriptors_for(model, data, level);
  const fs::path path =
      options.out.value_or(config.output_dir / ("descriptors" + level_suffix(level) + ".csv"));
  if (!options.out) ensure_dir(config.output_dir);
  save_csv(Dataset(desc, data.labels()), path);
  out << "wrote " << desc.rows() << " descriptors of width " << desc.cols() << " to "
      << path.string() << '\n';
  return kSuccess;
}

int cmd_histogram(const RunConfig& config, const CommandOptions& options, std::ostream& out) {
  const CascadeModel model = load_checkpoint(checkpoint_path(config, options));
  const auto level = resolve_level(model, options);
  const Dataset data = evaluation_split(config);
  const Matrix desc = descriptors_for(model, data, level);
  const HistogramStats stats =
      distance_histograms(desc, data.labels(), config.eval.bin_count, 0.0, bin_upper(model, level));
  const fs::path path =
      options.out.value_or(config.output_dir / ("histogram" + level_suffix(level) + ".csv"));
  if (!options.out) ensure_dir(config.output_dir);
  auto f = open_out(path);
  write_histogram_csv(f, stats);
  finish(f, path);
  out << "m_pos: " << stats.m_pos << "\nv_pos: " << stats.v_pos << "\nm_neg: " << stats.m_neg
      << "\nv_neg: " << stats.v_neg << "\nlda: " << lda_score(stats)
      << "\noverlap: " << histogram_overlap(stats) << "\nwrote " << path.string() << '\n';
  return kSuccess;
}

int cmd_gradcheck(const RunConfig& config, std::ostream& out, const GradientHook& hook) {
  config.cascade.validate();
  // Tiny network with the configured cascade depth and loss settings.
  CascadeConfig tiny = config.cascade;
  tiny.input_dim = 5;
  for (auto& widths : tiny.block_layers) widths.assign(widths.size(), 6);
  tiny.embed_dim.assign(tiny.levels(), 4);
  const GradcheckCase c = differentiable_case(tiny, 3, 3, config.train.rank_by, tiny.seed);
  const GradCheckReport report = check_cascade_gradients(c, 1e-5, hook);
  const std::size_t count = c.model.params.count();

  const bool pass = report.max_relative_error < kGradcheckTolerance;
  out << "gradcheck over " << count << " parameters, " << tiny.levels() << " levels\n"
      << "max_relative_error: " << report.max_relative_error << '\n'
      << "worst_parameter_index: " << report.worst_parameter_index << '\n'
      << "analytic: " << report.analytic_value << '\n'
      << "numeric: " << report.numeric_value << '\n'
      << (pass ? "PASS" : "FAIL") << '\n';
  return pass ? kSuccess : kGradcheckFailed;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Hard-aware cascaded embedding: training, mining and retrieval evaluation", "hdc"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> mode;
  std::optional<std::string> rank_by;
  std::optional<std::string> output_dir;
  std::optional<std::string> data_path;
  std::optional<std::size_t> workers;
  std::optional<std::size_t> iterations;
  std::vector<std::size_t> recall_at;
  CommandOptions options;
  std::optional<std::string> checkpoint;
  std::optional<std::string> out_path;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "YAML run configuration");
    sub->add_option("--seed", seed, "Override every seed");
    sub->add_option("--output-dir", output_dir, "Directory for all outputs");
    sub->add_option("--data", data_path, "Dataset CSV (label,x0,...) instead of synthetic data");
    sub->add_option("--workers", workers, "Worker threads for pair and query loops");
  };
  auto* synth = app.add_subcommand("synth", "Generate a synthetic dataset as CSV");
  add_common(synth);
  synth->add_option("--out", out_path, "Output CSV path");

  auto* train_cmd = app.add_subcommand("train", "Train a cascade (hdc, hard_single, plain_contrastive)");
  add_common(train_cmd);
  train_cmd->add_option("--mode", mode, "Training mode");
  train_cmd->add_option("--rank-by", rank_by, "Hard-set ranking: current or previous");
  train_cmd->add_option("--iterations", iterations, "Number of SGD iterations");

  auto* eval_cmd = app.add_subcommand("eval", "Recall@K, MAP, histograms and LDA score");
  add_common(eval_cmd);
  eval_cmd->add_option("--checkpoint", checkpoint, "Checkpoint (default <output-dir>/model.ckpt)");
  eval_cmd->add_option("--level", options.level, "Evaluate one cascade level (1-based)");
  eval_cmd->add_option("--recall-at", recall_at, "Recall cutoffs")->delimiter(',');

  auto* embed = app.add_subcommand("embed", "Write descriptors as CSV");
  add_common(embed);
  embed->add_option("--checkpoint", checkpoint, "Checkpoint (default <output-dir>/model.ckpt)");
  embed->add_option("--level", options.level, "Single cascade level (1-based)");
  embed->add_option("--out", out_path, "Output CSV path");

  auto* histogram = app.add_subcommand("histogram", "Positive/negative distance histograms as CSV");
  add_common(histogram);
  histogram->add_option("--checkpoint", checkpoint, "Checkpoint (default <output-dir>/model.ckpt)");
  histogram->add_option("--level", options.level, "Single cascade level (1-based)");
  histogram->add_option("--out", out_path, "Output CSV path");

  auto* gradcheck = app.add_subcommand("gradcheck", "Finite-difference check of cascade gradients");
  add_common(gradcheck);
  gradcheck->add_option("--rank-by", rank_by, "Hard-set ranking: current or previous");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kSuccess : kUsageError;
  }

  try {
    RunConfig config = config_path.empty() ? RunConfig{} : load_run_config(config_path);
    if (seed) apply_seed(config, *seed);
    if (mode) config.train.mode = parse_train_mode(*mode);
    if (rank_by) config.train.rank_by = parse_rank_by(*rank_by);
    if (output_dir) config.output_dir = *output_dir;
    if (data_path) config.data.path = *data_path;
    if (workers) config.train.workers = *workers;
    if (iterations) config.train.iterations = *iterations;
    if (!recall_at.empty()) config.eval.recall_at = recall_at;
    if (checkpoint) options.checkpoint = *checkpoint;
    if (out_path) options.out = *out_path;

    if (synth->parsed()) return cmd_synth(config, options, out);
    if (train_cmd->parsed()) return cmd_train(config, out);
    if (eval_cmd->parsed()) return cmd_eval(config, options, out);
    if (embed->parsed()) return cmd_embed(config, options, out);
    if (histogram->parsed()) return cmd_histogram(config, options, out);
    if (gradcheck->parsed()) return cmd_gradcheck(config, out);
  } catch (const TrainingAbortedError& e) {
    err << "training aborted: " << e.what() << '\n'
        << "batch rows: " << join(e.batch_rows(), ',') << '\n';
    return kTrainingAborted;
  } catch (const IoError& e) {
    err << "I/O error: " << e.what() << '\n';
    return kIoError;
  } catch (const MalformedCheckpointError& e) {
    err << "unreadable checkpoint: " << e.what() << '\n';
    return kIoError;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kUsageError;
  }
  return kUsageError;
}

}  // namespace hdc::cli
