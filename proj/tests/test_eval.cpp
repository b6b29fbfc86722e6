#include <cmath>
#include <sstream>

#include <doctest.h>

#include "hdc/error.hpp"
#include "hdc/eval.hpp"
#include "hdc/random.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace hdc;

namespace {

// Random points with a few exact duplicates so distance ties occur.
Matrix random_points(Rng& rng, std::size_t n, std::size_t dim) {
  Matrix m = test::random_matrix(rng, n, dim);
  for (std::size_t r = 1; r < n; r += 7) {
    const std::size_t src = uniform_index(rng, r);
    for (std::size_t c = 0; c < dim; ++c) m(r, c) = m(src, c);
  }
  return m;
}

}  // namespace

TEST_CASE("recall_at_k examples") {
  const Matrix pts{{0, 0}, {0.1, 0}, {1, 0}, {1.1, 0}};
  const std::vector<int> labels{0, 0, 1, 1};
  const RetrievalSet set{pts, labels, pts, labels, true};
  const std::vector<std::size_t> ks{1, 2, 3};
  const auto r = recall_at_k(set, ks);
  CHECK(r.at(1) == 1.0);
  CHECK(r.at(3) == 1.0);
  CHECK(rank_database(set, 0) == std::vector<std::size_t>{1, 2, 3});

  // Without self-exclusion the query finds itself first.
  const RetrievalSet with_self{pts, labels, pts, labels, false};
  CHECK(rank_database(with_self, 2).front() == 2);

  const Matrix empty(0, 2);
  const std::vector<int> none;
  const std::vector<int> one_label{0};
  const Matrix one{{0, 0}};
  CHECK_THROWS_AS(recall_at_k(RetrievalSet{one, one_label, empty, none, false}, ks), EvaluationError);
  const std::vector<std::size_t> zero_k{0};
  CHECK_THROWS_AS(recall_at_k(set, zero_k), EvaluationError);
}

TEST_CASE("tie break by ascending database index") {
  const Matrix q{{0, 0}};
  const Matrix db{{1, 0}, {0, 1}, {-1, 0}};
  const std::vector<int> ql{1};
  const std::vector<int> dl{0, 1, 1};
  const RetrievalSet set{q, ql, db, dl, false};
  CHECK(rank_database(set, 0) == std::vector<std::size_t>{0, 1, 2});
  const std::vector<std::size_t> ks{1, 2};
  const auto r = recall_at_k(set, ks);
  CHECK(r.at(1) == 0.0);
  CHECK(r.at(2) == 1.0);
}

TEST_CASE("average precision") {
  CHECK(average_precision({true, false, true}) == doctest::Approx(5.0 / 6.0).epsilon(1e-15));
  CHECK(std::abs(average_precision({true, false, true}) - 0.8333333333) < 1e-9);
  CHECK(average_precision({true, true, false, false}) == 1.0);
  CHECK_THROWS_AS(average_precision({false, false}), UndefinedApError);

  const Matrix q{{0.0}};
  const Matrix db{{5.0}};
  const std::vector<int> l{2};
  CHECK(mean_average_precision(RetrievalSet{q, l, db, l, false}) == 1.0);

  const std::vector<int> other{3};
  const RetrievalSet missing{q, l, db, other, false};
  CHECK_THROWS_AS(mean_average_precision(missing), UndefinedApError);
  CHECK_THROWS_AS(mean_average_precision(missing, true), EvaluationError);

  const Matrix q2{{0.0}, {1.0}};
  const std::vector<int> ql2{2, 3};
  const Matrix db2{{0.5}, {0.7}};
  const std::vector<int> dl2{2, 2};
  CHECK(mean_average_precision(RetrievalSet{q2, ql2, db2, dl2, false}, true) == 1.0);
}

TEST_CASE("engine metrics equal the brute-force oracle") {
  Rng rng(2024);
  const std::vector<std::size_t> ks{1, 2, 4, 8, 16, 32};
  for (int instance = 0; instance < 20; ++instance) {
    const std::size_t n = 2 + uniform_index(rng, 120);
    const std::size_t dim = 1 + uniform_index(rng, 6);
    const Matrix pts = random_points(rng, n, dim);
    std::vector<int> labels(n);
    const std::size_t classes = 1 + uniform_index(rng, 6);
    for (std::size_t i = 0; i < n; ++i) labels[i] = static_cast<int>(i % classes);
    if (n < 2 * classes) continue;  // every query needs a classmate
    const RetrievalSet set{pts, labels, pts, labels, true};
    CHECK(recall_at_k(set, ks) == oracle::recall(pts, labels, pts, labels, ks, true));
    CHECK(mean_average_precision(set) == oracle::mean_ap(pts, labels, pts, labels, true));
    CHECK(recall_at_k(set, ks, 3) == recall_at_k(set, ks, 1));
    CHECK(mean_average_precision(set, false, 3) == mean_average_precision(set));
  }
}

TEST_CASE("recall is monotone and scale invariant") {
  Rng rng(7);
  const Matrix pts = random_points(rng, 80, 4);
  const auto labels = test::block_labels(8, 10);
  const std::vector<std::size_t> ks{1, 2, 3, 5, 8, 13, 21, 34, 79, 200};
  const RetrievalSet set{pts, labels, pts, labels, true};
  const auto r = recall_at_k(set, ks);
  double prev = 0.0;
  for (auto [k, v] : r) {
    CHECK(v >= prev);
    prev = v;
  }
  CHECK(r.at(79) == 1.0);
  CHECK(r.at(200) == 1.0);

  for (double scale : {0.5, 3.0, 1.7320508075688772}) {
    Matrix scaled = pts;
    scaled *= scale;
    const RetrievalSet s2{scaled, labels, scaled, labels, true};
    CHECK(recall_at_k(s2, ks) == r);
    CHECK(mean_average_precision(s2) == mean_average_precision(set));
  }
}

TEST_CASE("distance_histograms") {
  SUBCASE("identical same-class points") {
    const Matrix d{{1, 0}, {1, 0}, {0, 1}};
    const std::vector<int> l{0, 0, 1};
    const auto h = distance_histograms(d, l);
    CHECK(h.m_pos == 0.0);
    CHECK(h.v_pos == 0.0);
    CHECK(h.positive_pairs() == 1);
    CHECK(h.negative_pairs() == 2);
  }
  SUBCASE("distances {1, 3}") {
    // positives (0,1) at distance 1 and (2,3) at distance 3 on a line
    const Matrix d{{0.0}, {1.0}, {10.0}, {13.0}};
    const std::vector<int> l{0, 0, 1, 1};
    const auto h = distance_histograms(d, l, 10, 0.0, 20.0);
    CHECK(h.m_pos == 2.0);
    CHECK(h.v_pos == 1.0);
    CHECK(h.positive_pairs() == 2);
    CHECK(h.negative_pairs() == 4);
    CHECK(h.pos_bins[0] == 1);
    CHECK(h.pos_bins[1] == 1);
  }
  SUBCASE("clamping and counts") {
    Rng rng(9);
    const Matrix d = test::random_matrix(rng, 30, 3);
    const auto l = test::block_labels(3, 10);
    const auto h = distance_histograms(d, l, 7, 0.5, 1.0);
    std::size_t pos = 0, neg = 0;
    for (auto c : h.pos_bins) pos += c;
    for (auto c : h.neg_bins) neg += c;
    CHECK(pos == 3 * 45);
    CHECK(neg == 435 - 3 * 45);
    CHECK(h.v_pos >= 0.0);
    CHECK(h.v_neg >= 0.0);
  }
  SUBCASE("errors") {
    const Matrix d{{0.0}, {1.0}};
    const std::vector<int> same{0, 0};
    const std::vector<int> diff{0, 1};
    CHECK_THROWS_AS(distance_histograms(d, same), EvaluationError);
    CHECK_THROWS_AS(distance_histograms(d, diff), EvaluationError);
  }
}

TEST_CASE("lda_score") {
  CHECK(lda_score(0.804, 0.019, 0.941, 0.016) == doctest::Approx(0.54).epsilon(0.01 / 0.54));
  CHECK(std::abs(lda_score(0.756, 0.015, 1.080, 0.027) - 2.50) <= 0.01);
  CHECK(lda_score(0.9, 0.01, 0.9, 0.02) == 0.0);
  CHECK_THROWS_AS(lda_score(0.1, 0.0, 0.9, 0.0), EvaluationError);
  for (const auto& row : oracle::published_lda_rows()) {
    INFO(row.name);
    CHECK(std::abs(lda_score(row.m_pos, row.v_pos, row.m_neg, row.v_neg) - row.lda) <= 0.015);
  }
}

TEST_CASE("histogram overlap") {
  HistogramStats h;
  h.bin_count = 4;
  h.pos_bins = {2, 2, 0, 0};
  h.neg_bins = {0, 1, 1, 2};
  // shares: pos {.5,.5,0,0}, neg {0,.25,.25,.5} -> min sum .25
  CHECK(histogram_overlap(h) == 0.25);
  h.neg_bins = {4, 4, 0, 0};
  CHECK(histogram_overlap(h) == 1.0);
  h.neg_bins = {0, 0, 3, 1};
  CHECK(histogram_overlap(h) == 0.0);
}

TEST_CASE("evaluate and writers") {
  const Matrix pts{{0, 0}, {0.1, 0}, {1, 0}, {1.1, 0}};
  const std::vector<int> labels{0, 0, 1, 1};
  EvalOptions opts;
  opts.ks = {1, 2, 4, 8};
  const auto rep = evaluate(pts, labels, opts);
  CHECK(rep.recall_at.size() == 4);
  CHECK(rep.map_score == 1.0);
  CHECK(rep.histogram.m_pos == doctest::Approx(0.1));
  CHECK(rep.lda == lda_score(rep.histogram));

  std::ostringstream recall, text, hist;
  write_recall_csv(recall, rep);
  CHECK(recall.str() == "k,recall\n1,1\n2,1\n4,1\n8,1\n");
  write_report_text(text, rep);
  CHECK(text.str().find("map: 1\n") != std::string::npos);
  CHECK(text.str().find("recall@1: 1\n") != std::string::npos);
  write_histogram_csv(hist, rep.histogram);
  std::size_t lines = 0;
  for (char c : hist.str()) lines += c == '\n';
  CHECK(lines == 101);
}
