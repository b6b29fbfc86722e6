#ifndef HDC_DATA_HPP_
#define HDC_DATA_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <span>
#include <utility>
#include <vector>

#include "hdc/error.hpp"
#include "hdc/matrix.hpp"
#include "hdc/random.hpp"

namespace hdc {

class SamplingError : public Error {
 public:
  using Error::Error;
};

/// Feature rows with non-negative integer class labels.
class Dataset {
 public:
  Dataset() = default;
  /// Throws DimensionError when label count and row count differ, ConfigError on negative labels.
  Dataset(Matrix features, std::vector<int> labels);

  const Matrix& features() const { return features_; }
  const std::vector<int>& labels() const { return labels_; }
  /// Class id -> row indices in ascending order.
  const std::map<int, std::vector<std::size_t>>& class_index() const { return class_index_; }

  std::size_t size() const { return labels_.size(); }
  std::size_t dim() const { return features_.cols(); }
  std::size_t num_classes() const { return class_index_.size(); }

  Dataset subset(std::span<const std::size_t> rows) const;

  bool operator==(const Dataset& other) const {
    return features_ == other.features_ && labels_ == other.labels_;
  }

 private:
  Matrix features_;
  std::vector<int> labels_;
  std::map<int, std::vector<std::size_t>> class_index_;
};

/// Rows are `label,x_0,...,x_{d-1}`, no header. Errors name the 1-based line.
Dataset load_csv(const std::filesystem::path& path);
Dataset parse_csv(std::istream& in);
/// Writes values in shortest round-trip form so load_csv(save_csv(d)) == d.
void save_csv(const Dataset& dataset, const std::filesystem::path& path);
void write_csv(const Dataset& dataset, std::ostream& out);

struct SynthConfig {
  std::size_t num_classes = 10;
  std::size_t per_class = 50;
  std::size_t dim = 32;
  double centroid_scale = 1.0;
  double noise_sigma = 0.8;
  /// Share of each class's points placed near a foreign centroid.
  double hard_fraction_mix = 0.15;
  /// Hard points sit this far along the segment from their own centroid to
  /// the foreign one (1 = on the foreign centroid).
  double hard_shift = 0.6;
  std::uint64_t seed = 7;

  void validate() const;
};

/**
 * Gaussian clusters around centroids drawn uniform in +-centroid_scale.
 * Each class draws one foreign class uniformly; floor(hard_fraction_mix *
 * per_class) randomly chosen points of the class are centred hard_shift of
 * the way towards that foreign centroid and keep their own label.
 * Rows are grouped by class (class 0 first).
 */
Dataset synth_clusters(const SynthConfig& config);

/// Per-class split: a seeded shuffle of each class, the first
/// ceil(train_fraction * count) rows go to the first dataset.
std::pair<Dataset, Dataset> split_per_class(const Dataset& dataset, double train_fraction,
                                            std::uint64_t seed);

struct SamplerConfig {
  std::size_t classes_per_batch = 10;  // P
  std::size_t images_per_class = 10;   // Q
  std::uint64_t seed = 3;

  void validate() const;
  std::size_t batch_size() const { return classes_per_batch * images_per_class; }
};

/**
 * Class-balanced mini-batches: P classes drawn uniformly without replacement
 * from the classes that hold at least Q rows, then Q rows per class drawn
 * without replacement. Batches are independent of each other.
 */
class BatchSampler {
 public:
  explicit BatchSampler(SamplerConfig config);
  BatchSampler(SamplerConfig config, std::uint64_t stream);

  /// Row indices grouped by class, P * Q in total. Throws SamplingError.
  std::vector<std::size_t> sample(const Dataset& dataset);

  const SamplerConfig& config() const { return config_; }

 private:
  SamplerConfig config_;
  Rng rng_;
};

}  // namespace hdc

#endif  // HDC_DATA_HPP_
