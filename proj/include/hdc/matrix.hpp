#ifndef HDC_MATRIX_HPP_
#define HDC_MATRIX_HPP_

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace hdc {

/**
 * @brief Dense row-major matrix of doubles.
 *
 * The storage always holds exactly rows() * cols() entries. Row vectors
 * (biases) are represented as 1 x m matrices.
 */
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  static Matrix identity(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }

  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }
  const std::vector<double>& data() const { return data_; }

  void fill(double v);

  /// Rows picked by index, in the given order.
  Matrix gather_rows(std::span<const std::size_t> indices) const;
  /// Columns [begin, begin + count).
  Matrix col_slice(std::size_t begin, std::size_t count) const;

  bool all_finite() const;

  Matrix& operator+=(const Matrix& other);
  Matrix& operator*=(double s);

  /// Bitwise comparison of shape and payload.
  bool operator==(const Matrix& other) const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

Matrix transpose(const Matrix& m);
/// Plain product a * b.
Matrix matmul(const Matrix& a, const Matrix& b);
/// a^T * b without materializing the transpose.
Matrix matmul_tn(const Matrix& a, const Matrix& b);
/// a * b^T without materializing the transpose.
Matrix matmul_nt(const Matrix& a, const Matrix& b);
/// Concatenate blocks side by side; all must share a row count.
Matrix hconcat(std::span<const Matrix> blocks);

}  // namespace hdc

#endif  // HDC_MATRIX_HPP_
