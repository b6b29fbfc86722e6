#ifndef HDC_TRAINER_HPP_
#define HDC_TRAINER_HPP_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hdc/cascade.hpp"
#include "hdc/data.hpp"
#include "hdc/error.hpp"
#include "hdc/mining.hpp"

namespace hdc {

enum class TrainMode {
  hdc,                // every level trained on its own hard set
  hard_single,        // deepest path only, top 50% mined by its loss
  plain_contrastive,  // deepest path only, all pairs
};

std::string to_string(TrainMode mode);
/// Throws ConfigError for unknown names.
TrainMode parse_train_mode(const std::string& name);
std::string to_string(RankBy rank_by);
RankBy parse_rank_by(const std::string& name);

struct TrainConfig {
  std::size_t iterations = 2000;
  double lr_initial = 0.01;
  std::size_t lr_decay_every = 600;
  double lr_decay_factor = 0.1;
  double momentum = 0.9;
  TrainMode mode = TrainMode::hdc;
  RankBy rank_by = RankBy::current;
  /// 0 disables periodic checkpoints.
  std::size_t checkpoint_every = 0;
  std::uint64_t seed = 11;
  std::size_t workers = 1;

  void validate() const;
};

/// lr_initial * lr_decay_factor ^ floor(iteration / lr_decay_every)
double lr_at(std::size_t iteration, const TrainConfig& config);

/// v <- momentum * v + g; p <- p - lr * v, for every tensor.
void sgd_step(Parameters& params, const Parameters& grads, Parameters& velocity, double lr,
              double momentum);

struct IterationRecord {
  std::size_t iteration = 0;
  double learning_rate = 0.0;
  double total_loss = 0.0;
  /// 0-based ids of the levels the per-level vectors describe.
  std::vector<std::size_t> levels;
  /// Per level: mean loss over the selected pairs P_k and N_k.
  std::vector<double> mean_loss;
  std::vector<std::size_t> positives;
  std::vector<std::size_t> negatives;
  double wall_seconds = 0.0;
};

struct TrainLog {
  std::vector<IterationRecord> records;
};

/// Thrown when an iteration produces a non-finite loss or gradient.
class TrainingAbortedError : public Error {
 public:
  TrainingAbortedError(const std::string& what, IterationRecord record,
                       std::vector<std::size_t> batch_rows)
      : Error(what), record_(std::move(record)), batch_rows_(std::move(batch_rows)) {}

  const IterationRecord& record() const { return record_; }
  const std::vector<std::size_t>& batch_rows() const { return batch_rows_; }

 private:
  IterationRecord record_;
  std::vector<std::size_t> batch_rows_;
};

struct TrainHooks {
  std::function<void(const IterationRecord&)> on_iteration;
  /// Called every checkpoint_every iterations with the 1-based count done.
  std::function<void(const CascadeModel&, std::size_t)> on_checkpoint;
};

/**
 * The hyperparameters a mode actually trains with. hdc keeps the model's
 * lambda and hard fractions. hard_single and plain_contrastive zero every
 * lambda but the deepest and pass all pairs through the shallower levels;
 * the deepest level keeps 50% (hard_single) or 100% (plain_contrastive).
 */
CascadeConfig effective_config(const CascadeConfig& model_config, TrainMode mode);

struct TrainResult {
  CascadeModel model;
  TrainLog log;
};

/**
 * Sample, mine, backpropagate and update for config.iterations steps. The
 * returned model keeps the caller's config; only parameters change.
 */
TrainResult train(CascadeModel model, const Dataset& dataset, const TrainConfig& config,
                  const SamplerConfig& sampler, const TrainHooks& hooks = {});

/// Levels a mode reports: all of them for hdc, only the deepest for baselines.
std::vector<std::size_t> logged_levels(TrainMode mode, std::size_t levels);

/// One CSV line per record. Columns: iteration, lr, total_loss, then per level
/// mean_loss_k, pos_k, neg_k (1-based k); wall_seconds last when requested.
void write_log_header(std::ostream& out, std::span<const std::size_t> levels, bool wall_time);
void write_log_record(std::ostream& out, const IterationRecord& record, bool wall_time);

}  // namespace hdc

#endif  // HDC_TRAINER_HPP_
