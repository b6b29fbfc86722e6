#include "hdc/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <numeric>
#include <string>

#include "hdc/text.hpp"

namespace hdc {

Dataset::Dataset(Matrix features, std::vector<int> labels)
    : features_(std::move(features)), labels_(std::move(labels)) {
  if (labels_.size() != features_.rows()) {
    throw DimensionError("dataset has " + std::to_string(features_.rows()) + " rows but " +
                         std::to_string(labels_.size()) + " labels");
  }
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    if (labels_[i] < 0) throw ConfigError("labels must be non-negative");
    class_index_[labels_[i]].push_back(i);
  }
}

Dataset Dataset::subset(std::span<const std::size_t> rows) const {
  std::vector<int> labels;
  labels.reserve(rows.size());
  for (std::size_t r : rows) labels.push_back(labels_.at(r));
  return Dataset(features_.gather_rows(rows), std::move(labels));
}

Dataset parse_csv(std::istream& in) {
  std::vector<double> values;
  std::vector<int> labels;
  std::size_t dim = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split(line, ',');
    if (fields.size() < 2) {
      throw ParseError("line " + std::to_string(line_no) + ": expected a label and at least one value");
    }
    if (labels.empty()) {
      dim = fields.size() - 1;
    } else if (fields.size() - 1 != dim) {
      throw ParseError("line " + std::to_string(line_no) + ": expected " + std::to_string(dim) +
                       " values, found " + std::to_string(fields.size() - 1));
    }
    try {
      const auto label = parse_int(fields[0]);
      if (label < 0 || label > std::numeric_limits<int>::max()) {
        throw ParseError("label out of range");
      }
      labels.push_back(static_cast<int>(label));
      for (std::size_t c = 1; c < fields.size(); ++c) {
        const double v = parse_double(fields[c]);
        if (!std::isfinite(v)) throw ParseError("non-finite value");
        values.push_back(v);
      }
    } catch (const ParseError& e) {
      throw ParseError("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (labels.empty()) throw ParseError("empty dataset file");
  const std::size_t rows = labels.size();
  return Dataset(Matrix(rows, dim, std::move(values)), std::move(labels));
}

Dataset load_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return parse_csv(in);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

void write_csv(const Dataset& dataset, std::ostream& out) {
  for (std::size_t r = 0; r < dataset.size(); ++r) {
    out << dataset.labels()[r];
    for (double v : dataset.features().row(r)) out << ',' << format_double(v);
    out << '\n';
  }
}

void save_csv(const Dataset& dataset, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  write_csv(dataset, out);
  out.flush();
  if (!out) throw IoError("failed writing " + path.string());
}

void SynthConfig::validate() const {
  if (num_classes == 0 || per_class == 0 || dim == 0) {
    throw ConfigError("synthetic dataset counts must be positive");
  }
  if (!(noise_sigma >= 0.0)) throw ConfigError("noise_sigma must be non-negative");
  if (!(centroid_scale >= 0.0)) throw ConfigError("centroid_scale must be non-negative");
  if (!(hard_fraction_mix >= 0.0 && hard_fraction_mix < 1.0)) {
    throw ConfigError("hard_fraction_mix must lie in [0, 1)");
  }
  if (!(hard_shift > 0.0 && hard_shift <= 1.0)) throw ConfigError("hard_shift must lie in (0, 1]");
  if (hard_fraction_mix > 0.0 && num_classes < 2) {
    throw ConfigError("hard points need a foreign class");
  }
}

Dataset synth_clusters(const SynthConfig& config) {
  config.validate();
  Rng rng(config.seed);
  Matrix centroids(config.num_classes, config.dim);
  for (double& v : centroids.values()) v = uniform(rng, -config.centroid_scale, config.centroid_scale);

  const auto displaced = static_cast<std::size_t>(
      std::floor(config.hard_fraction_mix * static_cast<double>(config.per_class)));
  Matrix features(config.num_classes * config.per_class, config.dim);
  std::vector<int> labels;
  labels.reserve(features.rows());
  std::vector<std::size_t> order(config.per_class);
  std::vector<double> center(config.dim);
  for (std::size_t c = 0; c < config.num_classes; ++c) {
    // First `displaced` entries of a partial shuffle pick the hard points.
    std::iota(order.begin(), order.end(), 0);
    for (std::size_t i = 0; i < displaced; ++i) {
      std::swap(order[i], order[i + uniform_index(rng, config.per_class - i)]);
    }
    std::vector<bool> is_hard(config.per_class, false);
    for (std::size_t i = 0; i < displaced; ++i) is_hard[order[i]] = true;
    std::size_t foreign = c;
    if (displaced > 0) {
      const std::size_t other = uniform_index(rng, config.num_classes - 1);
      foreign = other >= c ? other + 1 : other;
    }
    auto own = centroids.row(c);
    auto far = centroids.row(foreign);
    for (std::size_t p = 0; p < config.per_class; ++p) {
      const double t = is_hard[p] ? config.hard_shift : 0.0;
      for (std::size_t d = 0; d < config.dim; ++d) center[d] = own[d] + t * (far[d] - own[d]);
      auto dst = features.row(c * config.per_class + p);
      for (std::size_t d = 0; d < config.dim; ++d) {
        dst[d] = center[d] + config.noise_sigma * standard_normal(rng);
      }
      labels.push_back(static_cast<int>(c));
    }
  }
  return Dataset(std::move(features), std::move(labels));
}

std::pair<Dataset, Dataset> split_per_class(const Dataset& dataset, double train_fraction,
                                            std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw ConfigError("train_fraction must lie in (0, 1)");
  }
  Rng rng(seed);
  std::vector<std::size_t> first;
  std::vector<std::size_t> second;
  for (const auto& [label, rows] : dataset.class_index()) {
    std::vector<std::size_t> shuffled = rows;
    for (std::size_t i = shuffled.size(); i > 1; --i) {
      std::swap(shuffled[i - 1], shuffled[uniform_index(rng, i)]);
    }
    const auto keep = static_cast<std::size_t>(
        std::ceil(train_fraction * static_cast<double>(shuffled.size())));
    first.insert(first.end(), shuffled.begin(), shuffled.begin() + keep);
    second.insert(second.end(), shuffled.begin() + keep, shuffled.end());
  }
  std::sort(first.begin(), first.end());
  std::sort(second.begin(), second.end());
  return {dataset.subset(first), dataset.subset(second)};
}

void SamplerConfig::validate() const {
  if (classes_per_batch < 2 || images_per_class < 2) {
    throw ConfigError("sampler needs at least 2 classes per batch and 2 images per class");
  }
}

BatchSampler::BatchSampler(SamplerConfig config) : BatchSampler(config, 0) {}

BatchSampler::BatchSampler(SamplerConfig config, std::uint64_t stream)
    : config_(config), rng_(mix_seed(config.seed, stream)) {
  config_.validate();
}

std::vector<std::size_t> BatchSampler::sample(const Dataset& dataset) {
  const std::size_t p = config_.classes_per_batch;
  const std::size_t q = config_.images_per_class;
  if (dataset.num_classes() < p) {
    throw SamplingError("dataset has " + std::to_string(dataset.num_classes()) +
                        " classes, batch needs " + std::to_string(p));
  }
  std::vector<const std::vector<std::size_t>*> eligible;
  for (const auto& [label, rows] : dataset.class_index()) {
    if (rows.size() >= q) eligible.push_back(&rows);
  }
  if (eligible.size() < p) {
    throw SamplingError("only " + std::to_string(eligible.size()) + " classes have at least " +
                        std::to_string(q) + " rows, batch needs " + std::to_string(p));
  }
  std::vector<std::size_t> batch;
  batch.reserve(p * q);
  for (std::size_t c = 0; c < p; ++c) {
    std::swap(eligible[c], eligible[c + uniform_index(rng_, eligible.size() - c)]);
    std::vector<std::size_t> rows = *eligible[c];
    for (std::size_t i = 0; i < q; ++i) {
      std::swap(rows[i], rows[i + uniform_index(rng_, rows.size() - i)]);
      batch.push_back(rows[i]);
    }
  }
  return batch;
}

}  // namespace hdc
