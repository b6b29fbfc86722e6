#include "hdc/trainer.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <ostream>

#include "hdc/text.hpp"

namespace hdc {

std::string to_string(TrainMode mode) {
  switch (mode) {
    case TrainMode::hdc:
      return "hdc";
    case TrainMode::hard_single:
      return "hard_single";
    case TrainMode::plain_contrastive:
      return "plain_contrastive";
  }
  return "unknown";
}

TrainMode parse_train_mode(const std::string& name) {
  if (name == "hdc") return TrainMode::hdc;
  if (name == "hard_single") return TrainMode::hard_single;
  if (name == "plain_contrastive") return TrainMode::plain_contrastive;
  throw ConfigError("unknown training mode '" + name +
                    "' (expected hdc, hard_single or plain_contrastive)");
}

std::string to_string(RankBy rank_by) {
  return rank_by == RankBy::current ? "current" : "previous";
}

RankBy parse_rank_by(const std::string& name) {
  if (name == "current") return RankBy::current;
  if (name == "previous") return RankBy::previous;
  throw ConfigError("unknown rank_by '" + name + "' (expected current or previous)");
}

void TrainConfig::validate() const {
  if (iterations == 0) throw ConfigError("iterations must be at least 1");
  if (!(lr_initial >= 0.0) || !std::isfinite(lr_initial)) {
    throw ConfigError("lr_initial must be finite and non-negative");
  }
  if (lr_decay_every == 0) throw ConfigError("lr_decay_every must be positive");
  if (!(lr_decay_factor > 0.0 && lr_decay_factor <= 1.0)) {
    throw ConfigError("lr_decay_factor must lie in (0, 1]");
  }
  if (!(momentum >= 0.0 && momentum < 1.0)) throw ConfigError("momentum must lie in [0, 1)");
}

double lr_at(std::size_t iteration, const TrainConfig& config) {
  const auto steps = static_cast<double>(iteration / config.lr_decay_every);
  return config.lr_initial * std::pow(config.lr_decay_factor, steps);
}

void sgd_step(Parameters& params, const Parameters& grads, Parameters& velocity, double lr,
              double momentum) {
  std::vector<Matrix*> p;
  std::vector<const Matrix*> g;
  std::vector<Matrix*> v;
  params.for_each_tensor([&](Matrix& m) { p.push_back(&m); });
  grads.for_each_tensor([&](const Matrix& m) { g.push_back(&m); });
  velocity.for_each_tensor([&](Matrix& m) { v.push_back(&m); });
  if (p.size() != g.size() || p.size() != v.size()) {
    throw DimensionError("sgd_step: parameter, gradient and velocity layouts differ");
  }
  for (std::size_t t = 0; t < p.size(); ++t) {
    if (p[t]->rows() != g[t]->rows() || p[t]->cols() != g[t]->cols() ||
        p[t]->rows() != v[t]->rows() || p[t]->cols() != v[t]->cols()) {
      throw DimensionError("sgd_step: tensor " + std::to_string(t) + " shape mismatch");
    }
    auto pv = p[t]->values();
    auto gv = g[t]->values();
    auto vv = v[t]->values();
    for (std::size_t i = 0; i < pv.size(); ++i) {
      vv[i] = momentum * vv[i] + gv[i];
      pv[i] -= lr * vv[i];
    }
  }
}

CascadeConfig effective_config(const CascadeConfig& model_config, TrainMode mode) {
  CascadeConfig cfg = model_config;
  if (mode == TrainMode::hdc) return cfg;
  const std::size_t last = cfg.levels() - 1;
  for (std::size_t k = 0; k < last; ++k) {
    cfg.lambda[k] = 0.0;
    cfg.hard_fraction[k] = 100.0;
  }
  cfg.hard_fraction[last] = mode == TrainMode::hard_single ? 50.0 : 100.0;
  return cfg;
}

TrainResult train(CascadeModel model, const Dataset& dataset, const TrainConfig& config,
                  const SamplerConfig& sampler_config, const TrainHooks& hooks) {
  config.validate();
  model.config.validate();
  if (dataset.dim() != model.config.input_dim) {
    throw DimensionError("dataset has " + std::to_string(dataset.dim()) +
                         " features, model expects " + std::to_string(model.config.input_dim));
  }
  const CascadeConfig user_config = model.config;
  model.config = effective_config(user_config, config.mode);
  const std::vector<double> lambda = model.config.lambda;
  const std::size_t levels = model.config.levels();

  BatchSampler sampler(sampler_config, config.seed);
  Parameters velocity = model.params.zeros_like();
  // Baselines rank the deepest level by its own loss.
  const RankBy rank_by = config.mode == TrainMode::hdc ? config.rank_by : RankBy::current;
  MiningOptions mining{rank_by, config.workers};
  TrainLog log;
  log.records.reserve(config.iterations);
  const auto start = std::chrono::steady_clock::now();

  for (std::size_t it = 0; it < config.iterations; ++it) {
    const double lr = lr_at(it, config);
    const std::vector<std::size_t> rows = sampler.sample(dataset);
    const Matrix batch = dataset.features().gather_rows(rows);
    std::vector<int> labels;
    labels.reserve(rows.size());
    for (std::size_t r : rows) labels.push_back(dataset.labels()[r]);

    IterationRecord record;
    record.iteration = it;
    record.learning_rate = lr;
    MiningResult mined;
    try {
      mined = cascade_mine(model, batch, labels, mining);
    } catch (const DegenerateRowError& e) {
      // NaN or dead embeddings; same treatment as a non-finite loss
      record.total_loss = std::numeric_limits<double>::quiet_NaN();
      throw TrainingAbortedError("iteration " + std::to_string(it) + ": " + e.what(), record, rows);
    }
    record.total_loss = hdc_loss(mined.losses, mined.selection, lambda);
    for (std::size_t k : logged_levels(config.mode, levels)) {
      record.levels.push_back(k);
      const LevelLosses chosen = selected_losses(mined.losses[k], mined.selection.levels[k]);
      double sum = 0.0;
      for (double v : chosen.positive_losses) sum += v;
      for (double v : chosen.negative_losses) sum += v;
      const std::size_t count = chosen.positive_losses.size() + chosen.negative_losses.size();
      record.mean_loss.push_back(sum / static_cast<double>(count));
      record.positives.push_back(chosen.positive_losses.size());
      record.negatives.push_back(chosen.negative_losses.size());
    }
    record.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    if (!std::isfinite(record.total_loss)) {
      throw TrainingAbortedError("non-finite loss at iteration " + std::to_string(it), record, rows);
    }
    const Parameters grads =
        backward_cascade(model, mined.cache, mined.selection, lambda, config.workers);
    bool finite = true;
    grads.for_each_tensor([&](const Matrix& m) { finite = finite && m.all_finite(); });
    if (!finite) {
      throw TrainingAbortedError("non-finite gradient at iteration " + std::to_string(it), record,
                                 rows);
    }
    sgd_step(model.params, grads, velocity, lr, config.momentum);

    if (hooks.on_iteration) hooks.on_iteration(record);
    log.records.push_back(std::move(record));
    if (hooks.on_checkpoint && config.checkpoint_every > 0 &&
        (it + 1) % config.checkpoint_every == 0 && it + 1 < config.iterations) {
      CascadeModel snapshot{user_config, model.params};
      hooks.on_checkpoint(snapshot, it + 1);
    }
  }
  model.config = user_config;
  return {std::move(model), std::move(log)};
}

std::vector<std::size_t> logged_levels(TrainMode mode, std::size_t levels) {
  // Baselines train a single level; only that level is logged.
  if (mode != TrainMode::hdc) return {levels - 1};
  std::vector<std::size_t> all(levels);
  for (std::size_t k = 0; k < levels; ++k) all[k] = k;
  return all;
}

void write_log_header(std::ostream& out, std::span<const std::size_t> levels, bool wall_time) {
  out << "iteration,lr,total_loss";
  for (std::size_t k : levels) {
    out << ",mean_loss_" << k + 1 << ",pos_" << k + 1 << ",neg_" << k + 1;
  }
  if (wall_time) out << ",wall_seconds";
  out << '\n';
}

void write_log_record(std::ostream& out, const IterationRecord& record, bool wall_time) {
  out << record.iteration << ',' << format_double(record.learning_rate) << ','
      << format_double(record.total_loss);
  for (std::size_t k = 0; k < record.mean_loss.size(); ++k) {
    out << ',' << format_double(record.mean_loss[k]) << ',' << record.positives[k] << ','
        << record.negatives[k];
  }
  if (wall_time) out << ',' << format_double(record.wall_seconds);
  out << '\n';
}

}  // namespace hdc
