#include "hdc/cascade_gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "hdc/error.hpp"
#include "hdc/ops.hpp"
#include "hdc/random.hpp"

namespace hdc {

double kink_margin(const MiningResult& mined, double margin) {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& level : mined.cache.levels) {
    for (const auto& layer : level.layers) {
      for (double v : layer.pre_activation.data()) m = std::min(m, std::abs(v));
    }
  }
  for (std::size_t k = 0; k < mined.selection.levels.size(); ++k) {
    const Matrix& f = mined.cache.levels[k].embedding;
    const PairSet& pairs = mined.selection.levels[k].pairs;
    for (const auto& p : pairs.positives) m = std::min(m, row_distance(f, p.i, p.j));
    for (const auto& p : pairs.negatives) {
      const double d = row_distance(f, p.i, p.j);
      m = std::min({m, d, std::abs(d - margin)});
    }
  }
  return m;
}

GradcheckCase differentiable_case(const CascadeConfig& config, std::size_t classes,
                                  std::size_t per_class, RankBy rank_by, std::uint64_t seed,
                                  double min_margin, std::size_t attempts) {
  Rng rng(mix_seed(seed, 17));
  GradcheckCase c;
  auto jitter = [&](Matrix& bias) {
    for (double& v : bias.values()) v = uniform(rng, -0.1, 0.1);
  };
  for (std::size_t cls = 0; cls < classes; ++cls)
    c.labels.insert(c.labels.end(), per_class, static_cast<int>(cls));

  for (std::size_t attempt = 0; attempt < attempts; ++attempt) {
    // fresh weights and biases too: a narrow block can be dead for every batch
    CascadeConfig draw = config;
    if (attempt > 0) draw.seed = mix_seed(config.seed, attempt);
    c.model = init_model(draw);
    c.model.config = config;
    for (auto& level : c.model.params.levels) {
      for (auto& layer : level.block) jitter(layer.bias);
      jitter(level.head.bias);
    }
    c.batch = Matrix(classes * per_class, config.input_dim);
    for (double& v : c.batch.values()) v = standard_normal(rng);
    try {
      c.mined = cascade_mine(c.model, c.batch, c.labels, {rank_by, 1});
    } catch (const DegenerateRowError&) {
      continue;
    }
    if (kink_margin(c.mined, config.margin) >= min_margin) return c;
  }
  throw NumericError("no differentiable gradient-check batch found in " +
                     std::to_string(attempts) + " draws");
}

GradCheckReport check_cascade_gradients(const GradcheckCase& c, double step,
                                        const std::function<void(Parameters&)>& hook) {
  const auto& lambda = c.model.config.lambda;
  Parameters grads = backward_cascade(c.model, c.mined.cache, c.mined.selection, lambda);
  if (hook) hook(grads);
  CascadeModel probe = c.model;
  auto loss = [&](std::span<const double> flat) {
    probe.params.assign(flat);
    return frozen_selection_loss(probe, c.batch, c.mined.selection, lambda);
  };
  return finite_diff_check(loss, c.model.params.flatten(), grads.flatten(), step);
}

}  // namespace hdc
