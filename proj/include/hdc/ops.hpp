#ifndef HDC_OPS_HPP_
#define HDC_OPS_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "hdc/matrix.hpp"

namespace hdc {

/// Rows whose Euclidean norm is at or below this are rejected by normalization.
inline constexpr double kNormEpsilon = 1e-12;

/// Y = X * W + b, with b a 1 x m row broadcast over rows.
Matrix linear_forward(const Matrix& x, const Matrix& w, const Matrix& b);

struct LinearGrads {
  Matrix dx;
  Matrix dw;
  Matrix db;
};

/// dX = dY * W^T, dW = X^T * dY, db = column sums of dY.
LinearGrads linear_backward(const Matrix& x, const Matrix& w, const Matrix& dy);

Matrix relu_forward(const Matrix& x);
/// Passes dY through where the forward input was strictly positive.
Matrix relu_backward(const Matrix& x, const Matrix& dy);

/// Divides every row by its Euclidean norm. Throws DegenerateRowError for rows
/// with norm <= kNormEpsilon.
Matrix l2_normalize_rows(const Matrix& x);

/**
 * Backward of l2_normalize_rows. For a row x with y = x / |x| the Jacobian is
 * (I - y y^T) / |x|, so dX = (dY - y (y . dY)) / |x|.
 *
 * @param x the forward input
 * @param y the forward output
 */
Matrix l2_normalize_rows_backward(const Matrix& x, const Matrix& y, const Matrix& dy);

struct IndexPair {
  std::uint32_t i = 0;
  std::uint32_t j = 0;

  bool operator==(const IndexPair&) const = default;
};

/// Euclidean distance between rows i and j of f (not squared).
double row_distance(const Matrix& f, std::size_t i, std::size_t j);

/// Distances for each pair; throws IndexError on rows outside f.
std::vector<double> pairwise_distance(const Matrix& f, std::span<const IndexPair> pairs);

}  // namespace hdc

#endif  // HDC_OPS_HPP_
