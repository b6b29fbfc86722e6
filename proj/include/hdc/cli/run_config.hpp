#ifndef HDC_CLI_RUN_CONFIG_HPP_
#define HDC_CLI_RUN_CONFIG_HPP_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "hdc/cascade.hpp"
#include "hdc/data.hpp"
#include "hdc/eval.hpp"
#include "hdc/trainer.hpp"

namespace hdc::cli {

struct DataSource {
  /// CSV dataset; when empty the synthetic generator is used.
  std::filesystem::path path;
  SynthConfig synth;
  /// Per-class share used for training; the rest is the held-out evaluation
  /// split. 1 trains and evaluates on everything.
  double train_fraction = 0.6;
  std::uint64_t split_seed = 5;
};

struct EvalSettings {
  std::vector<std::size_t> recall_at = {1, 2, 4, 8, 16, 32};
  std::size_t bin_count = 100;
};

/// Everything a command needs. Defaults are the desk-scale experiment:
/// K=3, lambda=1, h={100,50,20}, M=1, 10 classes x 10 images, lr 0.01 /10 steps.
struct RunConfig {
  CascadeConfig cascade;
  TrainConfig train;
  SamplerConfig sampler;
  DataSource data;
  EvalSettings eval;
  std::filesystem::path output_dir = "hdc_out";
  /// Append wall-clock seconds to training log rows (makes logs run-dependent).
  bool log_wall_time = false;
};

/**
 * Reads a YAML file with optional sections `cascade`, `train`, `sampler`,
 * `data` (with nested `synth`), `eval` and a top-level `output_dir`.
 * Missing keys keep their defaults; unknown keys are a ConfigError.
 */
RunConfig load_run_config(const std::filesystem::path& path);
RunConfig parse_run_config(const std::string& yaml_text);
std::string emit_run_config(const RunConfig& config);

/// Sets every seed (model init, sampler, trainer, synthetic data, split).
void apply_seed(RunConfig& config, std::uint64_t seed);

}  // namespace hdc::cli

#endif  // HDC_CLI_RUN_CONFIG_HPP_
