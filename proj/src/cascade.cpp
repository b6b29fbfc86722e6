#include "hdc/cascade.hpp"

#include <cmath>
#include <cstring>
#include <string>

#include "hdc/error.hpp"
#include "hdc/ops.hpp"
#include "hdc/random.hpp"

namespace hdc {

void CascadeConfig::validate() const {
  const std::size_t k = levels();
  if (k == 0) throw ConfigError("cascade needs at least one level");
  if (input_dim == 0) throw ConfigError("input_dim must be positive");
  if (embed_dim.size() != k || lambda.size() != k || hard_fraction.size() != k) {
    throw ConfigError("block_layers, embed_dim, lambda and hard_fraction must all have " +
                      std::to_string(k) + " entries");
  }
  for (std::size_t l = 0; l < k; ++l) {
    if (block_layers[l].empty()) {
      throw ConfigError("level " + std::to_string(l + 1) + " block has no layers");
    }
    for (std::size_t w : block_layers[l]) {
      if (w == 0) throw ConfigError("layer widths must be positive");
    }
    if (embed_dim[l] == 0) throw ConfigError("embed_dim must be positive");
    if (!(lambda[l] >= 0.0) || !std::isfinite(lambda[l])) {
      throw ConfigError("lambda must be finite and non-negative");
    }
    if (!(hard_fraction[l] > 0.0 && hard_fraction[l] <= 100.0)) {
      throw ConfigError("hard_fraction must lie in (0, 100]");
    }
  }
  if (!(margin > 0.0) || !std::isfinite(margin)) throw ConfigError("margin must be positive");
}

std::size_t CascadeConfig::block_output_dim(std::size_t level) const {
  return block_layers.at(level).back();
}

std::size_t CascadeConfig::descriptor_dim() const {
  std::size_t d = 0;
  for (std::size_t e : embed_dim) d += e;
  return d;
}

std::size_t Parameters::count() const {
  std::size_t n = 0;
  for_each_tensor([&](const Matrix& m) { n += m.size(); });
  return n;
}

void Parameters::for_each_tensor(const std::function<void(Matrix&)>& fn) {
  for (auto& level : levels) {
    for (auto& layer : level.block) {
      fn(layer.weight);
      fn(layer.bias);
    }
    fn(level.head.weight);
    fn(level.head.bias);
  }
}

void Parameters::for_each_tensor(const std::function<void(const Matrix&)>& fn) const {
  for (const auto& level : levels) {
    for (const auto& layer : level.block) {
      fn(layer.weight);
      fn(layer.bias);
    }
    fn(level.head.weight);
    fn(level.head.bias);
  }
}

std::vector<double> Parameters::flatten() const {
  std::vector<double> flat;
  flat.reserve(count());
  for_each_tensor([&](const Matrix& m) { flat.insert(flat.end(), m.data().begin(), m.data().end()); });
  return flat;
}

void Parameters::assign(std::span<const double> flat) {
  if (flat.size() != count()) throw DimensionError("Parameters::assign: wrong length");
  std::size_t offset = 0;
  for_each_tensor([&](Matrix& m) {
    auto dst = m.values();
    std::copy(flat.begin() + offset, flat.begin() + offset + dst.size(), dst.begin());
    offset += dst.size();
  });
}

Parameters Parameters::zeros_like() const {
  Parameters z = *this;
  z.for_each_tensor([](Matrix& m) { m.fill(0.0); });
  return z;
}

std::uint64_t CascadeModel::fingerprint() const {
  std::uint64_t h = 1469598103934665603ULL;
  params.for_each_tensor([&](const Matrix& m) {
    const auto* bytes = reinterpret_cast<const unsigned char*>(m.data().data());
    for (std::size_t i = 0; i < m.size() * sizeof(double); ++i) {
      h ^= bytes[i];
      h *= 1099511628211ULL;
    }
    h ^= m.rows() * 31 + m.cols();
    h *= 1099511628211ULL;
  });
  return h;
}

namespace {

Dense glorot_layer(Rng& rng, std::size_t fan_in, std::size_t fan_out) {
  const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  Dense d{Matrix(fan_in, fan_out), Matrix(1, fan_out)};
  for (double& v : d.weight.values()) v = uniform(rng, -bound, bound);
  return d;
}

}  // namespace

CascadeModel init_model(const CascadeConfig& config) {
  config.validate();
  CascadeModel model{config, {}};
  Rng rng(config.seed);
  std::size_t in = config.input_dim;
  for (std::size_t k = 0; k < config.levels(); ++k) {
    LevelParams level;
    for (std::size_t width : config.block_layers[k]) {
      level.block.push_back(glorot_layer(rng, in, width));
      in = width;
    }
    level.head = glorot_layer(rng, in, config.embed_dim[k]);
    model.params.levels.push_back(std::move(level));
  }
  return model;
}

ForwardCache forward(const CascadeModel& model, const Matrix& x) {
  const auto& cfg = model.config;
  if (x.cols() != cfg.input_dim) {
    throw DimensionError("forward: input has " + std::to_string(x.cols()) +
                         " columns, model expects " + std::to_string(cfg.input_dim));
  }
  if (model.params.levels.size() != cfg.levels()) {
    throw DimensionError("forward: parameter levels do not match config");
  }
  ForwardCache cache;
  cache.batch_rows = x.rows();
  cache.model_fingerprint = model.fingerprint();
  cache.levels.reserve(cfg.levels());
  const Matrix* current = &x;
  for (std::size_t k = 0; k < cfg.levels(); ++k) {
    const auto& params = model.params.levels[k];
    LevelCache level;
    level.layers.reserve(params.block.size());
    Matrix activation;
    for (const auto& layer : params.block) {
      LayerCache lc;
      lc.input = *current;
      lc.pre_activation = linear_forward(lc.input, layer.weight, layer.bias);
      activation = relu_forward(lc.pre_activation);
      level.layers.push_back(std::move(lc));
      current = &activation;
    }
    level.block_output = std::move(activation);
    level.head_output = linear_forward(level.block_output, params.head.weight, params.head.bias);
    level.embedding = l2_normalize_rows(level.head_output);
    cache.levels.push_back(std::move(level));
    current = &cache.levels.back().block_output;
  }
  return cache;
}

Matrix extract_descriptor(const CascadeModel& model, const Matrix& x,
                          std::optional<std::size_t> level) {
  if (level && *level >= model.config.levels()) {
    throw IndexError("level " + std::to_string(*level + 1) + " does not exist in a " +
                     std::to_string(model.config.levels()) + "-level cascade");
  }
  ForwardCache cache = forward(model, x);
  if (level) return std::move(cache.levels[*level].embedding);
  std::vector<Matrix> parts;
  parts.reserve(cache.levels.size());
  for (auto& l : cache.levels) parts.push_back(std::move(l.embedding));
  return hconcat(parts);
}

}  // namespace hdc
