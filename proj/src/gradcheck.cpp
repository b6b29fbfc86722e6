#include "hdc/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "hdc/error.hpp"

namespace hdc {

double relative_error(double analytic, double numeric) {
  return std::abs(analytic - numeric) /
         std::max(1e-8, std::abs(analytic) + std::abs(numeric));
}

GradCheckReport finite_diff_check(const ScalarFunction& loss, std::span<const double> params,
                                  std::span<const double> analytic, double step) {
  if (!(step > 0.0)) throw ConfigError("finite_diff_check: step must be positive");
  if (params.size() != analytic.size()) {
    throw DimensionError("finite_diff_check: " + std::to_string(params.size()) +
                         " parameters but " + std::to_string(analytic.size()) + " gradients");
  }
  std::vector<double> probe(params.begin(), params.end());
  GradCheckReport report;
  for (std::size_t i = 0; i < probe.size(); ++i) {
    const double saved = probe[i];
    probe[i] = saved + step;
    const double up = loss(probe);
    probe[i] = saved - step;
    const double down = loss(probe);
    probe[i] = saved;
    if (!std::isfinite(up) || !std::isfinite(down)) {
      throw NumericError("finite_diff_check: non-finite loss at parameter " + std::to_string(i));
    }
    const double numeric = (up - down) / (2.0 * step);
    const double err = relative_error(analytic[i], numeric);
    if (i == 0 || err > report.max_relative_error) {
      report.max_relative_error = err;
      report.worst_parameter_index = i;
      report.analytic_value = analytic[i];
      report.numeric_value = numeric;
    }
  }
  return report;
}

}  // namespace hdc
