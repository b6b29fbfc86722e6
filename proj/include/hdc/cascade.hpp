#ifndef HDC_CASCADE_HPP_
#define HDC_CASCADE_HPP_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "hdc/matrix.hpp"

namespace hdc {

/**
 * @brief Shape and hyperparameters of a K-level cascade.
 *
 * Level k (0-based here) owns a block G_k, a stack of fully-connected layers
 * with ReLU after each layer, and a head F_k, one linear layer whose output
 * is L2-normalized. Block k consumes the output of block k-1; block 0
 * consumes the raw input.
 */
struct CascadeConfig {
  std::size_t input_dim = 32;
  std::vector<std::vector<std::size_t>> block_layers = {{64}, {64}, {64}};
  std::vector<std::size_t> embed_dim = {16, 16, 16};
  /// Per-level loss weights.
  std::vector<double> lambda = {1.0, 1.0, 1.0};
  /// Per-level hard-set percentages in (0, 100].
  std::vector<double> hard_fraction = {100.0, 50.0, 20.0};
  double margin = 1.0;
  std::uint64_t seed = 1;

  std::size_t levels() const { return block_layers.size(); }
  /// Throws ConfigError describing the first violated constraint.
  void validate() const;
  std::size_t block_output_dim(std::size_t level) const;
  std::size_t descriptor_dim() const;

  bool operator==(const CascadeConfig&) const = default;
};

struct Dense {
  Matrix weight;  // fan_in x fan_out
  Matrix bias;    // 1 x fan_out

  bool operator==(const Dense&) const = default;
};

struct LevelParams {
  std::vector<Dense> block;
  Dense head;

  bool operator==(const LevelParams&) const = default;
};

/// Parameter (or gradient) storage, one entry per level.
struct Parameters {
  std::vector<LevelParams> levels;

  std::size_t count() const;
  /// Copy of every tensor in declaration order: per level, the block layers'
  /// (weight, bias) then the head's (weight, bias).
  std::vector<double> flatten() const;
  void assign(std::span<const double> flat);
  Parameters zeros_like() const;

  void for_each_tensor(const std::function<void(Matrix&)>& fn);
  void for_each_tensor(const std::function<void(const Matrix&)>& fn) const;

  bool operator==(const Parameters&) const = default;
};

struct CascadeModel {
  CascadeConfig config;
  Parameters params;

  /// FNV-1a over the parameter bytes; ties forward caches to a parameter state.
  std::uint64_t fingerprint() const;
};

/// Glorot-uniform weights in +-sqrt(6 / (fan_in + fan_out)), zero biases.
CascadeModel init_model(const CascadeConfig& config);

struct LayerCache {
  Matrix input;
  Matrix pre_activation;
};

struct LevelCache {
  std::vector<LayerCache> layers;
  Matrix block_output;  // o_k
  Matrix head_output;   // F_k(o_k) before normalization
  Matrix embedding;     // f_k, unit rows
};

struct ForwardCache {
  std::vector<LevelCache> levels;
  std::size_t batch_rows = 0;
  std::uint64_t model_fingerprint = 0;
};

/// Runs every level on all rows of x.
ForwardCache forward(const CascadeModel& model, const Matrix& x);

/// Concatenation [f_1 | ... | f_K] of all per-level embeddings, not renormalized.
/// With `level`, returns only that level's (0-based) embedding.
Matrix extract_descriptor(const CascadeModel& model, const Matrix& x,
                          std::optional<std::size_t> level = std::nullopt);

}  // namespace hdc

#endif  // HDC_CASCADE_HPP_
