#ifndef HDC_GRADCHECK_HPP_
#define HDC_GRADCHECK_HPP_

#include <cstddef>
#include <functional>
#include <span>

namespace hdc {

struct GradCheckReport {
  double max_relative_error = 0.0;
  std::size_t worst_parameter_index = 0;
  double analytic_value = 0.0;
  double numeric_value = 0.0;
};

/// |a - n| / max(1e-8, |a| + |n|)
double relative_error(double analytic, double numeric);

using ScalarFunction = std::function<double(std::span<const double>)>;

/**
 * Compares an analytic gradient against central differences
 * (f(p + h e_i) - f(p - h e_i)) / 2h for every coordinate of params.
 *
 * Throws NumericError if the loss is non-finite at any probe, and
 * DimensionError if analytic and params differ in length.
 */
GradCheckReport finite_diff_check(const ScalarFunction& loss, std::span<const double> params,
                                  std::span<const double> analytic, double step = 1e-5);

}  // namespace hdc

#endif  // HDC_GRADCHECK_HPP_
