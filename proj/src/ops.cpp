#include "hdc/ops.hpp"

#include <cmath>
#include <string>

#include "hdc/error.hpp"

namespace hdc {
namespace {

void require_same_shape(const Matrix& a, const Matrix& b, const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionError(std::string(what) + ": shape mismatch");
  }
}

double row_norm(std::span<const double> r) {
  double sq = 0.0;
  for (double v : r) sq += v * v;
  return std::sqrt(sq);
}

}  // namespace

Matrix linear_forward(const Matrix& x, const Matrix& w, const Matrix& b) {
  if (x.cols() != w.rows()) {
    throw DimensionError("linear_forward: input width " + std::to_string(x.cols()) +
                         " does not match weight rows " + std::to_string(w.rows()));
  }
  if (b.rows() != 1 || b.cols() != w.cols()) {
    throw DimensionError("linear_forward: bias must be 1x" + std::to_string(w.cols()));
  }
  Matrix y = matmul(x, w);
  for (std::size_t r = 0; r < y.rows(); ++r) {
    auto dst = y.row(r);
    for (std::size_t c = 0; c < y.cols(); ++c) dst[c] += b(0, c);
  }
  return y;
}

LinearGrads linear_backward(const Matrix& x, const Matrix& w, const Matrix& dy) {
  if (x.cols() != w.rows() || dy.rows() != x.rows() || dy.cols() != w.cols()) {
    throw DimensionError("linear_backward: shapes do not conform with forward call");
  }
  LinearGrads g;
  g.dx = matmul_nt(dy, w);
  g.dw = matmul_tn(x, dy);
  g.db = Matrix(1, dy.cols());
  for (std::size_t r = 0; r < dy.rows(); ++r) {
    for (std::size_t c = 0; c < dy.cols(); ++c) g.db(0, c) += dy(r, c);
  }
  return g;
}

Matrix relu_forward(const Matrix& x) {
  Matrix y(x.rows(), x.cols());
  auto src = x.values();
  auto dst = y.values();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = src[i] > 0.0 ? src[i] : 0.0;
  return y;
}

Matrix relu_backward(const Matrix& x, const Matrix& dy) {
  require_same_shape(x, dy, "relu_backward");
  Matrix dx(x.rows(), x.cols());
  auto src = x.values();
  auto g = dy.values();
  auto dst = dx.values();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = src[i] > 0.0 ? g[i] : 0.0;
  return dx;
}

Matrix l2_normalize_rows(const Matrix& x) {
  Matrix y(x.rows(), x.cols());
  for (std::size_t r = 0; r < x.rows(); ++r) {
    auto src = x.row(r);
    const double norm = row_norm(src);
    if (!(norm > kNormEpsilon)) {
      throw DegenerateRowError("row " + std::to_string(r) + " has norm " +
                               std::to_string(norm) + ", cannot normalize");
    }
    auto dst = y.row(r);
    for (std::size_t c = 0; c < src.size(); ++c) dst[c] = src[c] / norm;
  }
  return y;
}

Matrix l2_normalize_rows_backward(const Matrix& x, const Matrix& y, const Matrix& dy) {
  require_same_shape(x, y, "l2_normalize_rows_backward");
  require_same_shape(x, dy, "l2_normalize_rows_backward");
  Matrix dx(x.rows(), x.cols());
  for (std::size_t r = 0; r < x.rows(); ++r) {
    const double norm = row_norm(x.row(r));
    if (!(norm > kNormEpsilon)) {
      throw DegenerateRowError("row " + std::to_string(r) + " is degenerate in backward");
    }
    auto yr = y.row(r);
    auto gr = dy.row(r);
    double dot = 0.0;
    for (std::size_t c = 0; c < yr.size(); ++c) dot += yr[c] * gr[c];
    auto dst = dx.row(r);
    for (std::size_t c = 0; c < yr.size(); ++c) dst[c] = (gr[c] - yr[c] * dot) / norm;
  }
  return dx;
}

double row_distance(const Matrix& f, std::size_t i, std::size_t j) {
  // Accumulate in ascending (min, max) row order so D(i,j) == D(j,i) bitwise.
  const std::size_t a = i < j ? i : j;
  const std::size_t b = i < j ? j : i;
  auto ra = f.row(a);
  auto rb = f.row(b);
  double sq = 0.0;
  for (std::size_t c = 0; c < ra.size(); ++c) {
    const double d = ra[c] - rb[c];
    sq += d * d;
  }
  return std::sqrt(sq);
}

std::vector<double> pairwise_distance(const Matrix& f, std::span<const IndexPair> pairs) {
  std::vector<double> out;
  out.reserve(pairs.size());
  for (const auto& p : pairs) {
    if (p.i >= f.rows() || p.j >= f.rows()) {
      throw IndexError("pair (" + std::to_string(p.i) + ", " + std::to_string(p.j) +
                       ") out of range for " + std::to_string(f.rows()) + " rows");
    }
    out.push_back(row_distance(f, p.i, p.j));
  }
  return out;
}

}  // namespace hdc
