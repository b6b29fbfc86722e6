#include "hdc/mining.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <string>

#include "hdc/parallel.hpp"

namespace hdc {
namespace {

constexpr std::size_t kPairChunk = 2048;

std::size_t chunk_count(std::size_t n) { return (n + kPairChunk - 1) / kPairChunk; }

void check_pair_indices(const PairSet& pairs, std::size_t rows) {
  auto check = [&](const IndexPair& p) {
    if (p.i >= rows || p.j >= rows) {
      throw IndexError("pair (" + std::to_string(p.i) + ", " + std::to_string(p.j) +
                       ") out of range for " + std::to_string(rows) + " embeddings");
    }
  };
  std::for_each(pairs.positives.begin(), pairs.positives.end(), check);
  std::for_each(pairs.negatives.begin(), pairs.negatives.end(), check);
}

std::vector<double> chunked_distances(const Matrix& f, std::span<const IndexPair> pairs,
                                      std::size_t workers) {
  std::vector<double> d(pairs.size());
  parallel_for(chunk_count(pairs.size()), workers, [&](std::size_t c) {
    const std::size_t end = std::min(pairs.size(), (c + 1) * kPairChunk);
    for (std::size_t p = c * kPairChunk; p < end; ++p) d[p] = row_distance(f, pairs[p].i, pairs[p].j);
  });
  return d;
}

template <typename T>
std::vector<T> pick(const std::vector<T>& items, std::span<const std::size_t> indices) {
  std::vector<T> out;
  out.reserve(indices.size());
  for (std::size_t i : indices) out.push_back(items[i]);
  return out;
}

/// dL/df for one level, scaled by weight; accumulated per chunk then reduced in chunk order.
Matrix embedding_gradient(const Matrix& f, const PairSet& pairs, double margin, double weight,
                          std::size_t workers) {
  const std::size_t n_pos = pairs.positives.size();
  const std::size_t total = pairs.size();
  const std::size_t chunks = chunk_count(total);
  std::vector<Matrix> partial(chunks, Matrix(f.rows(), f.cols()));
  parallel_for(chunks, workers, [&](std::size_t c) {
    Matrix& acc = partial[c];
    const std::size_t end = std::min(total, (c + 1) * kPairChunk);
    for (std::size_t p = c * kPairChunk; p < end; ++p) {
      const bool positive = p < n_pos;
      const IndexPair pair = positive ? pairs.positives[p] : pairs.negatives[p - n_pos];
      const double dist = row_distance(f, pair.i, pair.j);
      // D = 0 has no gradient; inactive hinges have zero gradient.
      if (!(dist > 0.0)) continue;
      double scale;
      if (positive) {
        scale = weight / dist;
      } else {
        if (!(dist < margin)) continue;
        scale = -weight / dist;
      }
      auto fi = f.row(pair.i);
      auto fj = f.row(pair.j);
      auto gi = acc.row(pair.i);
      auto gj = acc.row(pair.j);
      for (std::size_t c2 = 0; c2 < fi.size(); ++c2) {
        const double g = scale * (fi[c2] - fj[c2]);
        gi[c2] += g;
        gj[c2] -= g;
      }
    }
  });
  if (chunks == 0) return Matrix(f.rows(), f.cols());
  Matrix sum = std::move(partial[0]);
  for (std::size_t c = 1; c < chunks; ++c) sum += partial[c];
  return sum;
}

void check_consistency(const CascadeModel& model, const ForwardCache& cache,
                       const CascadeSelection& selection, std::span<const double> lambda) {
  const std::size_t k = model.config.levels();
  if (cache.levels.size() != k || selection.levels.size() != k || lambda.size() != k) {
    throw ConsistencyError("cache, selection and lambda must all cover " + std::to_string(k) +
                           " levels");
  }
  if (cache.batch_rows != selection.batch_rows) {
    throw ConsistencyError("selection was mined on a batch of " +
                           std::to_string(selection.batch_rows) + " rows, cache holds " +
                           std::to_string(cache.batch_rows));
  }
  if (cache.model_fingerprint != model.fingerprint()) {
    throw ConsistencyError("forward cache is stale: model parameters changed since forward");
  }
}

}  // namespace

PairSet enumerate_pairs(std::span<const int> labels, bool require_negatives) {
  const std::size_t n = labels.size();
  if (n < 2) throw EmptySetError("need at least two rows to form pairs");
  PairSet pairs;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      const IndexPair p{static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j)};
      (labels[i] == labels[j] ? pairs.positives : pairs.negatives).push_back(p);
    }
  }
  if (require_negatives && pairs.negatives.empty()) {
    throw NoNegativesError("batch has a single class; no negative pairs");
  }
  return pairs;
}

LevelLosses contrastive_losses(const Matrix& embeddings, const PairSet& pairs, double margin,
                               std::size_t level, std::size_t workers) {
  if (!(margin > 0.0)) throw ConfigError("margin must be positive");
  check_pair_indices(pairs, embeddings.rows());
  LevelLosses out;
  out.level = level;
  out.positive_losses = chunked_distances(embeddings, pairs.positives, workers);
  out.negative_losses = chunked_distances(embeddings, pairs.negatives, workers);
  for (double& v : out.negative_losses) v = std::max(0.0, margin - v);
  return out;
}

std::size_t hard_set_size(std::size_t n, double percent) {
  if (!(percent > 0.0 && percent <= 100.0)) {
    throw ConfigError("hard fraction must lie in (0, 100], got " + std::to_string(percent));
  }
  if (n == 0) return 0;
  // percent * n is exact for integral percents, so exact quotients stay exact.
  const double want = std::ceil(percent * static_cast<double>(n) / 100.0);
  return std::clamp<std::size_t>(static_cast<std::size_t>(want), 1, n);
}

std::vector<std::size_t> select_hard(std::span<const double> losses, double percent) {
  if (losses.empty()) throw EmptySetError("select_hard: no losses to rank");
  const std::size_t keep = hard_set_size(losses.size(), percent);
  std::vector<std::size_t> order(losses.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return losses[a] > losses[b]; });
  order.resize(keep);
  return order;
}

MiningResult cascade_mine(const CascadeModel& model, const Matrix& batch,
                          std::span<const int> labels, const MiningOptions& options) {
  const auto& cfg = model.config;
  if (labels.size() != batch.rows()) {
    throw DimensionError("cascade_mine: " + std::to_string(labels.size()) + " labels for " +
                         std::to_string(batch.rows()) + " rows");
  }
  MiningResult result;
  result.cache = forward(model, batch);
  result.selection.batch_rows = batch.rows();
  result.selection.candidates = enumerate_pairs(labels);
  if (result.selection.candidates.positives.empty()) {
    throw EmptySetError("batch has no positive pairs; every class needs two rows");
  }
  for (std::size_t k = 0; k < cfg.levels(); ++k) {
    const PairSet& input = result.selection.input_of(k);
    LevelLosses losses = contrastive_losses(result.cache.levels[k].embedding, input, cfg.margin,
                                            k, options.workers);
    std::optional<LevelLosses> ranking;
    if (options.rank_by == RankBy::previous && k > 0) {
      ranking = contrastive_losses(result.cache.levels[k - 1].embedding, input, cfg.margin, k - 1,
                                   options.workers);
    }
    const LevelLosses& rank_source = ranking ? *ranking : losses;
    LevelSelection sel;
    sel.positive_survivors = select_hard(rank_source.positive_losses, cfg.hard_fraction[k]);
    sel.negative_survivors = select_hard(rank_source.negative_losses, cfg.hard_fraction[k]);
    sel.pairs.positives = pick(input.positives, sel.positive_survivors);
    sel.pairs.negatives = pick(input.negatives, sel.negative_survivors);
    result.selection.levels.push_back(std::move(sel));
    result.losses.push_back(std::move(losses));
  }
  return result;
}

LevelLosses selected_losses(const LevelLosses& losses, const LevelSelection& selection) {
  LevelLosses out;
  out.level = losses.level;
  out.positive_losses = pick(losses.positive_losses, selection.positive_survivors);
  out.negative_losses = pick(losses.negative_losses, selection.negative_survivors);
  return out;
}

double hdc_loss(std::span<const LevelLosses> losses, const CascadeSelection& selection,
                std::span<const double> lambda) {
  if (losses.size() != selection.levels.size() || lambda.size() != losses.size()) {
    throw DimensionError("hdc_loss: losses, selection and lambda disagree on level count");
  }
  double total = 0.0;
  for (std::size_t k = 0; k < losses.size(); ++k) {
    if (lambda[k] == 0.0) continue;
    const auto& sel = selection.levels[k];
    double level_sum = 0.0;
    for (std::size_t i : sel.positive_survivors) level_sum += losses[k].positive_losses.at(i);
    for (std::size_t i : sel.negative_survivors) level_sum += losses[k].negative_losses.at(i);
    total += lambda[k] * level_sum;
  }
  return total;
}

double frozen_selection_loss(const CascadeModel& model, const Matrix& batch,
                             const CascadeSelection& selection, std::span<const double> lambda) {
  const ForwardCache cache = forward(model, batch);
  if (selection.levels.size() != cache.levels.size() || lambda.size() != cache.levels.size()) {
    throw DimensionError("frozen_selection_loss: level count mismatch");
  }
  double total = 0.0;
  for (std::size_t k = 0; k < cache.levels.size(); ++k) {
    if (lambda[k] == 0.0) continue;
    const auto losses = contrastive_losses(cache.levels[k].embedding, selection.levels[k].pairs,
                                           model.config.margin, k);
    double level_sum = 0.0;
    for (double v : losses.positive_losses) level_sum += v;
    for (double v : losses.negative_losses) level_sum += v;
    total += lambda[k] * level_sum;
  }
  return total;
}

Parameters backward_cascade(const CascadeModel& model, const ForwardCache& cache,
                            const CascadeSelection& selection, std::span<const double> lambda,
                            std::size_t workers) {
  check_consistency(model, cache, selection, lambda);
  const std::size_t levels = model.config.levels();
  Parameters grads = model.params.zeros_like();

  // Gradient reaching each o_k from its own head.
  std::vector<std::optional<Matrix>> head_grad(levels);
  for (std::size_t k = 0; k < levels; ++k) {
    if (lambda[k] == 0.0) continue;
    const auto& lc = cache.levels[k];
    check_pair_indices(selection.levels[k].pairs, lc.embedding.rows());
    const Matrix d_embed = embedding_gradient(lc.embedding, selection.levels[k].pairs,
                                              model.config.margin, lambda[k], workers);
    const Matrix d_head = l2_normalize_rows_backward(lc.head_output, lc.embedding, d_embed);
    LinearGrads g = linear_backward(lc.block_output, model.params.levels[k].head.weight, d_head);
    grads.levels[k].head.weight = std::move(g.dw);
    grads.levels[k].head.bias = std::move(g.db);
    head_grad[k] = std::move(g.dx);
  }

  // Walk blocks from deepest to shallowest, carrying d o_{k-1} downwards.
  std::optional<Matrix> from_above;
  for (std::size_t k = levels; k-- > 0;) {
    std::optional<Matrix> upstream;
    if (head_grad[k] && from_above) {
      upstream = std::move(*head_grad[k]);
      *upstream += *from_above;
    } else if (head_grad[k]) {
      upstream = std::move(*head_grad[k]);
    } else if (from_above) {
      upstream = std::move(*from_above);
    }
    from_above.reset();
    if (!upstream) continue;

    const auto& lc = cache.levels[k];
    const auto& block = model.params.levels[k].block;
    Matrix d = std::move(*upstream);
    for (std::size_t l = block.size(); l-- > 0;) {
      const Matrix d_pre = relu_backward(lc.layers[l].pre_activation, d);
      LinearGrads g = linear_backward(lc.layers[l].input, block[l].weight, d_pre);
      grads.levels[k].block[l].weight = std::move(g.dw);
      grads.levels[k].block[l].bias = std::move(g.db);
      d = std::move(g.dx);
    }
    if (k > 0) from_above = std::move(d);
  }
  return grads;
}

}  // namespace hdc
