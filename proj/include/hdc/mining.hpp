#ifndef HDC_MINING_HPP_
#define HDC_MINING_HPP_

#include <cstddef>
#include <span>
#include <vector>

#include "hdc/cascade.hpp"
#include "hdc/error.hpp"
#include "hdc/matrix.hpp"
#include "hdc/ops.hpp"

namespace hdc {

class NoNegativesError : public Error {
 public:
  using Error::Error;
};

class EmptySetError : public Error {
 public:
  using Error::Error;
};

/// Cache, selection and model do not belong to the same forward pass.
class ConsistencyError : public Error {
 public:
  using Error::Error;
};

/// Ordered index pairs into a mini-batch, split by label agreement.
struct PairSet {
  std::vector<IndexPair> positives;
  std::vector<IndexPair> negatives;

  std::size_t size() const { return positives.size() + negatives.size(); }
};

/**
 * All ordered pairs (i, j), i != j, in row-major order: n^2 - n pairs for n
 * rows. Throws NoNegativesError when every label is equal and
 * `require_negatives` is set.
 */
PairSet enumerate_pairs(std::span<const int> labels, bool require_negatives = true);

/// Contrastive losses of one level, aligned with the pair lists they were computed on.
struct LevelLosses {
  std::size_t level = 0;
  std::vector<double> positive_losses;  // D(f_i, f_j)
  std::vector<double> negative_losses;  // max(0, M - D(f_i, f_j))
};

LevelLosses contrastive_losses(const Matrix& embeddings, const PairSet& pairs, double margin,
                               std::size_t level = 0, std::size_t workers = 1);

/// ceil(percent / 100 * n), at least 1 and at most n.
std::size_t hard_set_size(std::size_t n, double percent);

/**
 * Indices of the top hard_set_size(n, percent) losses, by descending loss;
 * equal losses keep ascending index order. Throws EmptySetError on empty
 * input and ConfigError for percent outside (0, 100].
 */
std::vector<std::size_t> select_hard(std::span<const double> losses, double percent);

/// Which level's losses rank the candidates forwarded into level k.
enum class RankBy {
  current,   // level k's own losses
  previous,  // level k-1's losses (level 1 falls back to its own)
};

struct LevelSelection {
  PairSet pairs;                              // P_k, N_k
  std::vector<std::size_t> positive_survivors;  // indices into P_{k-1}
  std::vector<std::size_t> negative_survivors;  // indices into N_{k-1}
};

struct CascadeSelection {
  std::size_t batch_rows = 0;
  PairSet candidates;  // P_0, N_0
  std::vector<LevelSelection> levels;

  /// Pair set forwarded into `level`: P_0/N_0 for level 0, else the previous level's selection.
  const PairSet& input_of(std::size_t level) const {
    return level == 0 ? candidates : levels[level - 1].pairs;
  }
};

struct MiningOptions {
  RankBy rank_by = RankBy::current;
  std::size_t workers = 1;
};

struct MiningResult {
  ForwardCache cache;
  CascadeSelection selection;
  /// Level k's losses over its input set P_{k-1}/N_{k-1}.
  std::vector<LevelLosses> losses;
};

MiningResult cascade_mine(const CascadeModel& model, const Matrix& batch,
                          std::span<const int> labels, const MiningOptions& options = {});

/// Level k losses restricted to its selected pairs P_k/N_k.
LevelLosses selected_losses(const LevelLosses& losses, const LevelSelection& selection);

/// sum_k lambda_k * (sum over P_k of loss+ + sum over N_k of loss-).
double hdc_loss(std::span<const LevelLosses> losses, const CascadeSelection& selection,
                std::span<const double> lambda);

/// The same objective recomputed from scratch for fixed selections; the
/// function finite differences are taken of.
double frozen_selection_loss(const CascadeModel& model, const Matrix& batch,
                             const CascadeSelection& selection, std::span<const double> lambda);

/**
 * Gradients of hdc_loss with respect to every parameter, selections frozen.
 *
 * Each level l with lambda_l > 0 backpropagates its loss on P_l/N_l through
 * head F_l and then through blocks G_l, ..., G_1, so F_k only sees level k
 * and G_k accumulates all levels l >= k. Levels with lambda_l == 0 contribute
 * nothing, not even a zero-valued addition. Pair contributions are summed in
 * fixed-size chunks in pair order, so results do not depend on `workers`.
 */
Parameters backward_cascade(const CascadeModel& model, const ForwardCache& cache,
                            const CascadeSelection& selection, std::span<const double> lambda,
                            std::size_t workers = 1);

}  // namespace hdc

#endif  // HDC_MINING_HPP_
