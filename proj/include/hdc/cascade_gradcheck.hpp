#ifndef HDC_CASCADE_GRADCHECK_HPP_
#define HDC_CASCADE_GRADCHECK_HPP_

#include <cstdint>
#include <functional>
#include <vector>

#include "hdc/cascade.hpp"
#include "hdc/gradcheck.hpp"
#include "hdc/mining.hpp"

namespace hdc {

/**
 * Smallest distance of a mined batch from the places where the frozen-selection
 * loss is not differentiable: ReLU pre-activations at 0, selected pairs at
 * distance 0, and selected negatives at distance M.
 */
double kink_margin(const MiningResult& mined, double margin);

struct GradcheckCase {
  CascadeModel model;
  Matrix batch;
  std::vector<int> labels;
  MiningResult mined;
};

/**
 * A random model and batch at which the loss is differentiable with margin
 * `min_margin`. Biases get small random values: with zero biases a ReLU
 * cascade is positively homogeneous, so tiny nets map distinct rows onto the
 * same unit vector and the distance kink lands exactly on the check point.
 * The first draw uses config.seed; later draws re-initialise the weights from
 * a derived seed, so the returned parameters need not match init_model(config).
 * Throws NumericError when no such batch is found in `attempts` draws.
 */
GradcheckCase differentiable_case(const CascadeConfig& config, std::size_t classes,
                                  std::size_t per_class, RankBy rank_by, std::uint64_t seed,
                                  double min_margin = 1e-3, std::size_t attempts = 200);

/// Analytic gradients of the case, optionally altered by `hook`, against central differences.
GradCheckReport check_cascade_gradients(const GradcheckCase& c, double step = 1e-5,
                                        const std::function<void(Parameters&)>& hook = {});

}  // namespace hdc

#endif  // HDC_CASCADE_GRADCHECK_HPP_
