#include <cmath>
#include <numeric>
#include <vector>

#include <doctest.h>

#include "hdc/error.hpp"
#include "hdc/gradcheck.hpp"
#include "hdc/matrix.hpp"
#include "hdc/ops.hpp"
#include "hdc/random.hpp"
#include "test_util.hpp"

using namespace hdc;

namespace {

Matrix naive_product(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < b.cols(); ++j) {
      double acc = 0.0;
      for (std::size_t t = 0; t < a.cols(); ++t) acc += a(i, t) * b(t, j);
      out(i, j) = acc;
    }
  return out;
}

// Scalar probe sum(G .* f(X)) so every output entry carries a distinct weight.
double weighted_sum(const Matrix& y, const Matrix& weights) {
  double s = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) s += y.values()[i] * weights.values()[i];
  return s;
}

}  // namespace

TEST_CASE("linear_forward examples") {
  const Matrix x{{1, 2}};
  const Matrix b{{0, 0}};
  CHECK(linear_forward(x, Matrix::identity(2), b) == Matrix{{1, 2}});

  const Matrix x2{{1, 0}, {0, 1}};
  const Matrix w{{3}, {5}};
  CHECK(linear_forward(x2, w, Matrix{{1}}) == Matrix{{4}, {6}});

  CHECK_THROWS_AS(linear_forward(Matrix(2, 3), Matrix(2, 3), Matrix(1, 3)), DimensionError);
  CHECK_THROWS_AS(linear_forward(Matrix(2, 3), Matrix(3, 2), Matrix(1, 3)), DimensionError);
}

TEST_CASE("matmul equals the naive triple loop on every shape up to 16x16") {
  Rng rng(101);
  for (std::size_t n = 1; n <= 16; ++n)
    for (std::size_t d = 1; d <= 16; ++d) {
      const std::size_t m = 1 + uniform_index(rng, 16);
      const Matrix a = test::random_matrix(rng, n, d);
      const Matrix b = test::random_matrix(rng, d, m);
      const Matrix bias = test::random_matrix(rng, 1, m);
      const Matrix got = linear_forward(a, b, bias);
      const Matrix want = naive_product(a, b);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m; ++j) REQUIRE(std::abs(got(i, j) - want(i, j) - bias(0, j)) < 1e-12);
    }
}

TEST_CASE("linear_backward examples") {
  SUBCASE("zero upstream gradient") {
    Rng rng(5);
    const Matrix x = test::random_matrix(rng, 3, 4);
    const Matrix w = test::random_matrix(rng, 4, 2);
    const auto g = linear_backward(x, w, Matrix(3, 2));
    CHECK(g.dx == Matrix(3, 4));
    CHECK(g.dw == Matrix(4, 2));
    CHECK(g.db == Matrix(1, 2));
  }
  SUBCASE("scalar chain rule") {
    const auto g = linear_backward(Matrix{{2}}, Matrix{{3}}, Matrix{{1}});
    CHECK(g.dx == Matrix{{3}});
    CHECK(g.dw == Matrix{{2}});
    CHECK(g.db == Matrix{{1}});
  }
  SUBCASE("shape mismatch") {
    CHECK_THROWS_AS(linear_backward(Matrix(3, 4), Matrix(4, 2), Matrix(3, 3)), DimensionError);
  }
}

TEST_CASE("linear_backward matches finite differences") {
  Rng rng(17);
  for (int trial = 0; trial < 5; ++trial) {
    const std::size_t n = 1 + uniform_index(rng, 4);
    const std::size_t d = 1 + uniform_index(rng, 4);
    const std::size_t m = 1 + uniform_index(rng, 4);
    const Matrix x = test::random_matrix(rng, n, d);
    const Matrix w = test::random_matrix(rng, d, m);
    const Matrix b = test::random_matrix(rng, 1, m);
    const Matrix probe = test::random_matrix(rng, n, m);
    const auto g = linear_backward(x, w, probe);

    std::vector<double> flat(x.data());
    flat.insert(flat.end(), w.data().begin(), w.data().end());
    flat.insert(flat.end(), b.data().begin(), b.data().end());
    std::vector<double> analytic(g.dx.data());
    analytic.insert(analytic.end(), g.dw.data().begin(), g.dw.data().end());
    analytic.insert(analytic.end(), g.db.data().begin(), g.db.data().end());
    auto loss = [&](std::span<const double> p) {
      Matrix xx(n, d, std::vector<double>(p.begin(), p.begin() + n * d));
      Matrix ww(d, m, std::vector<double>(p.begin() + n * d, p.begin() + n * d + d * m));
      Matrix bb(1, m, std::vector<double>(p.begin() + n * d + d * m, p.end()));
      return weighted_sum(linear_forward(xx, ww, bb), probe);
    };
    CHECK(finite_diff_check(loss, flat, analytic).max_relative_error < 1e-6);
  }
}

TEST_CASE("relu forward and backward") {
  CHECK(relu_forward(Matrix{{-1, 2}}) == Matrix{{0, 2}});
  const Matrix neg{{-1, -2}, {-0.5, -3}};
  CHECK(relu_forward(neg) == Matrix(2, 2));
  CHECK(relu_backward(neg, Matrix{{1, 1}, {1, 1}}) == Matrix(2, 2));

  Rng rng(23);
  Matrix x = test::random_matrix(rng, 3, 5);
  // Keep inputs away from the kink so the finite differences are exact-slope.
  for (double& v : x.values()) v += v >= 0 ? 0.1 : -0.1;
  const Matrix probe = test::random_matrix(rng, 3, 5);
  const Matrix dx = relu_backward(x, probe);
  auto loss = [&](std::span<const double> p) {
    return weighted_sum(relu_forward(Matrix(3, 5, std::vector<double>(p.begin(), p.end()))), probe);
  };
  CHECK(finite_diff_check(loss, x.data(), dx.data()).max_relative_error < 1e-4);
}

TEST_CASE("l2_normalize_rows") {
  const Matrix y = l2_normalize_rows(Matrix{{3, 4}});
  CHECK(y(0, 0) == doctest::Approx(0.6).epsilon(1e-15));
  CHECK(y(0, 1) == doctest::Approx(0.8).epsilon(1e-15));

  const Matrix unit{{1, 0, 0}, {0, 0, 1}};
  CHECK(l2_normalize_rows(unit) == unit);

  CHECK_THROWS_AS(l2_normalize_rows(Matrix{{0, 0}}), DegenerateRowError);
  CHECK_THROWS_AS(l2_normalize_rows(Matrix{{1e-13, 0}}), DegenerateRowError);

  Rng rng(31);
  const Matrix x = test::random_matrix(rng, 20, 7);
  const Matrix n = l2_normalize_rows(x);
  for (std::size_t r = 0; r < n.rows(); ++r) {
    double sq = 0.0;
    for (double v : n.row(r)) sq += v * v;
    CHECK(std::abs(std::sqrt(sq) - 1.0) <= 1e-12);
  }
}

TEST_CASE("l2_normalize_rows backward matches finite differences") {
  Rng rng(37);
  for (int trial = 0; trial < 5; ++trial) {
    const Matrix x = test::random_matrix(rng, 4, 3);
    const Matrix probe = test::random_matrix(rng, 4, 3);
    const Matrix y = l2_normalize_rows(x);
    const Matrix dx = l2_normalize_rows_backward(x, y, probe);
    auto loss = [&](std::span<const double> p) {
      return weighted_sum(l2_normalize_rows(Matrix(4, 3, std::vector<double>(p.begin(), p.end()))), probe);
    };
    CHECK(finite_diff_check(loss, x.data(), dx.data()).max_relative_error < 1e-5);
  }
}

TEST_CASE("pairwise_distance") {
  const Matrix f{{1, 0}, {0, 1}, {1, 0}};
  const std::vector<IndexPair> pairs{{0, 2}, {0, 1}, {1, 0}};
  const auto d = pairwise_distance(f, pairs);
  CHECK(d[0] == 0.0);
  CHECK(d[1] == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
  CHECK(d[1] == d[2]);

  const std::vector<IndexPair> bad{{0, 3}};
  CHECK_THROWS_AS(pairwise_distance(f, bad), IndexError);

  Rng rng(41);
  const Matrix u = l2_normalize_rows(test::random_matrix(rng, 30, 6));
  for (std::uint32_t i = 0; i < 30; ++i)
    for (std::uint32_t j = 0; j < 30; ++j) {
      const double dij = row_distance(u, i, j);
      CHECK(dij >= 0.0);
      CHECK(dij <= 2.0);
      CHECK(dij == row_distance(u, j, i));
    }
}

TEST_CASE("finite_diff_check") {
  SUBCASE("quadratic is exact") {
    auto loss = [](std::span<const double> p) { return 0.5 * p[0] * p[0]; };
    const std::vector<double> theta{3.0};
    const std::vector<double> grad{3.0};
    CHECK(finite_diff_check(loss, theta, grad, 1e-5).max_relative_error < 1e-8);
  }
  SUBCASE("doubled analytic gradient is reported") {
    auto loss = [](std::span<const double> p) { return 0.5 * p[0] * p[0]; };
    const std::vector<double> theta{3.0};
    const std::vector<double> grad{6.0};
    const auto report = finite_diff_check(loss, theta, grad, 1e-5);
    // |2g - g| / (|2g| + |g|) with g = 3
    CHECK(report.max_relative_error == doctest::Approx(1.0 / 3.0).epsilon(1e-8));
    CHECK(report.worst_parameter_index == 0);
    CHECK(report.analytic_value == 6.0);
    CHECK(report.numeric_value == doctest::Approx(3.0).epsilon(1e-8));
  }
  SUBCASE("non-finite loss") {
    auto loss = [](std::span<const double> p) { return std::log(p[0]); };
    const std::vector<double> theta{0.0};
    const std::vector<double> grad{1.0};
    CHECK_THROWS_AS(finite_diff_check(loss, theta, grad), NumericError);
  }
  SUBCASE("relative error formula floors the denominator") {
    CHECK(relative_error(0.0, 0.0) == 0.0);
    CHECK(relative_error(1e-12, 0.0) == doctest::Approx(1e-4));
  }
}
