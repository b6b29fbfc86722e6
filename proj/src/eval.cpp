#include "hdc/eval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <string>

#include "hdc/ops.hpp"
#include "hdc/parallel.hpp"
#include "hdc/text.hpp"

namespace hdc {
namespace {

void validate(const RetrievalSet& set) {
  if (set.database.rows() == 0) throw EvaluationError("empty database");
  if (set.queries.cols() != set.database.cols()) {
    throw DimensionError("query and database descriptors differ in width");
  }
  if (set.query_labels.size() != set.queries.rows() ||
      set.database_labels.size() != set.database.rows()) {
    throw DimensionError("label count does not match descriptor rows");
  }
  if (set.exclude_self && set.queries.rows() != set.database.rows()) {
    throw EvaluationError("exclude_self needs the query set to be the database");
  }
  if (set.exclude_self && set.database.rows() < 2) {
    throw EvaluationError("leave-one-out retrieval needs at least two items");
  }
}

double distance(std::span<const double> a, std::span<const double> b) {
  double sq = 0.0;
  for (std::size_t c = 0; c < a.size(); ++c) {
    const double d = a[c] - b[c];
    sq += d * d;
  }
  return std::sqrt(sq);
}

std::vector<bool> relevance(const RetrievalSet& set, std::size_t query) {
  const auto order = rank_database(set, query);
  std::vector<bool> rel(order.size());
  for (std::size_t r = 0; r < order.size(); ++r) {
    rel[r] = set.database_labels[order[r]] == set.query_labels[query];
  }
  return rel;
}

}  // namespace

std::vector<std::size_t> rank_database(const RetrievalSet& set, std::size_t query) {
  auto q = set.queries.row(query);
  std::vector<std::pair<double, std::size_t>> scored;
  scored.reserve(set.database.rows());
  for (std::size_t d = 0; d < set.database.rows(); ++d) {
    if (set.exclude_self && d == query) continue;
    scored.emplace_back(distance(q, set.database.row(d)), d);
  }
  std::sort(scored.begin(), scored.end());
  std::vector<std::size_t> order;
  order.reserve(scored.size());
  for (const auto& s : scored) order.push_back(s.second);
  return order;
}

std::map<std::size_t, double> recall_at_k(const RetrievalSet& set, std::span<const std::size_t> ks,
                                          std::size_t workers) {
  validate(set);
  for (std::size_t k : ks) {
    if (k == 0) throw EvaluationError("recall cutoffs must be >= 1");
  }
  const std::size_t n = set.queries.rows();
  // Rank of the first relevant item per query; SIZE_MAX when none.
  std::vector<std::size_t> first_hit(n, static_cast<std::size_t>(-1));
  parallel_for(n, workers, [&](std::size_t q) {
    const auto rel = relevance(set, q);
    const auto it = std::find(rel.begin(), rel.end(), true);
    if (it != rel.end()) first_hit[q] = static_cast<std::size_t>(it - rel.begin());
  });
  std::map<std::size_t, double> out;
  for (std::size_t k : ks) {
    std::size_t hits = 0;
    for (std::size_t q = 0; q < n; ++q) hits += first_hit[q] < k ? 1 : 0;
    out[k] = static_cast<double>(hits) / static_cast<double>(n);
  }
  return out;
}

double average_precision(const std::vector<bool>& relevant) {
  std::size_t found = 0;
  double sum = 0.0;
  for (std::size_t r = 0; r < relevant.size(); ++r) {
    if (!relevant[r]) continue;
    ++found;
    sum += static_cast<double>(found) / static_cast<double>(r + 1);
  }
  if (found == 0) throw UndefinedApError("average precision undefined without a relevant item");
  return sum / static_cast<double>(found);
}

double mean_average_precision(const RetrievalSet& set, bool skip_undefined, std::size_t workers) {
  validate(set);
  const std::size_t n = set.queries.rows();
  std::vector<double> ap(n, 0.0);
  std::vector<char> defined(n, 0);
  parallel_for(n, workers, [&](std::size_t q) {
    const auto rel = relevance(set, q);
    if (std::find(rel.begin(), rel.end(), true) == rel.end()) return;
    ap[q] = average_precision(rel);
    defined[q] = 1;
  });
  double sum = 0.0;
  std::size_t counted = 0;
  for (std::size_t q = 0; q < n; ++q) {
    if (!defined[q]) {
      if (skip_undefined) continue;
      throw UndefinedApError("query " + std::to_string(q) + " (label " +
                             std::to_string(set.query_labels[q]) + ") has no match in the database");
    }
    sum += ap[q];
    ++counted;
  }
  if (counted == 0) throw EvaluationError("no query has a defined average precision");
  return sum / static_cast<double>(counted);
}

std::size_t HistogramStats::positive_pairs() const {
  return std::accumulate(pos_bins.begin(), pos_bins.end(), std::size_t{0});
}

std::size_t HistogramStats::negative_pairs() const {
  return std::accumulate(neg_bins.begin(), neg_bins.end(), std::size_t{0});
}

HistogramStats distance_histograms(const Matrix& descriptors, std::span<const int> labels,
                                   std::size_t bin_count, double bin_lo, double bin_hi) {
  if (labels.size() != descriptors.rows()) {
    throw DimensionError("label count does not match descriptor rows");
  }
  if (bin_count == 0 || !(bin_hi > bin_lo)) throw EvaluationError("invalid histogram binning");
  HistogramStats stats;
  stats.bin_lo = bin_lo;
  stats.bin_hi = bin_hi;
  stats.bin_count = bin_count;
  stats.pos_bins.assign(bin_count, 0);
  stats.neg_bins.assign(bin_count, 0);
  std::vector<double> pos;
  std::vector<double> neg;
  const double width = (bin_hi - bin_lo) / static_cast<double>(bin_count);
  for (std::size_t i = 0; i < descriptors.rows(); ++i) {
    for (std::size_t j = i + 1; j < descriptors.rows(); ++j) {
      const double d = row_distance(descriptors, i, j);
      const bool same = labels[i] == labels[j];
      (same ? pos : neg).push_back(d);
      const double slot = std::floor((d - bin_lo) / width);
      const std::size_t bin =
          slot < 0.0 ? 0 : std::min(bin_count - 1, static_cast<std::size_t>(slot));
      ++(same ? stats.pos_bins : stats.neg_bins)[bin];
    }
  }
  if (pos.empty() || neg.empty()) {
    throw EvaluationError("distance histograms need at least one positive and one negative pair");
  }
  auto moments = [](const std::vector<double>& v, double& mean, double& var) {
    double s = 0.0;
    for (double x : v) s += x;
    mean = s / static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    var = ss / static_cast<double>(v.size());
  };
  moments(pos, stats.m_pos, stats.v_pos);
  moments(neg, stats.m_neg, stats.v_neg);
  return stats;
}

double lda_score(double m_pos, double v_pos, double m_neg, double v_neg) {
  const double spread = v_pos + v_neg;
  if (!(spread > 0.0)) throw EvaluationError("LDA score undefined for zero total variance");
  const double gap = m_neg - m_pos;
  return gap * gap / spread;
}

double lda_score(const HistogramStats& stats) {
  return lda_score(stats.m_pos, stats.v_pos, stats.m_neg, stats.v_neg);
}

double histogram_overlap(const HistogramStats& stats) {
  const auto np = static_cast<double>(stats.positive_pairs());
  const auto nn = static_cast<double>(stats.negative_pairs());
  if (np == 0.0 || nn == 0.0) throw EvaluationError("overlap needs both polarities");
  double overlap = 0.0;
  for (std::size_t b = 0; b < stats.pos_bins.size(); ++b) {
    overlap += std::min(static_cast<double>(stats.pos_bins[b]) / np,
                        static_cast<double>(stats.neg_bins[b]) / nn);
  }
  return overlap;
}

EvalReport evaluate(const Matrix& descriptors, std::span<const int> labels,
                    const EvalOptions& options) {
  const RetrievalSet set{descriptors, labels, descriptors, labels, true};
  EvalReport report;
  report.recall_at = recall_at_k(set, options.ks, options.workers);
  report.map_score = mean_average_precision(set, options.skip_undefined_ap, options.workers);
  report.histogram = distance_histograms(descriptors, labels, options.bin_count, options.bin_lo,
                                         options.bin_hi);
  report.lda = lda_score(report.histogram);
  return report;
}

void write_report_text(std::ostream& out, const EvalReport& report) {
  for (const auto& [k, r] : report.recall_at) out << "recall@" << k << ": " << format_double(r) << '\n';
  const auto& h = report.histogram;
  out << "map: " << format_double(report.map_score) << '\n'
      << "m_pos: " << format_double(h.m_pos) << '\n'
      << "v_pos: " << format_double(h.v_pos) << '\n'
      << "m_neg: " << format_double(h.m_neg) << '\n'
      << "v_neg: " << format_double(h.v_neg) << '\n'
      << "lda: " << format_double(report.lda) << '\n'
      << "overlap: " << format_double(histogram_overlap(h)) << '\n';
}

void write_recall_csv(std::ostream& out, const EvalReport& report) {
  out << "k,recall\n";
  for (const auto& [k, r] : report.recall_at) out << k << ',' << format_double(r) << '\n';
}

void write_histogram_csv(std::ostream& out, const HistogramStats& stats) {
  const auto np = static_cast<double>(stats.positive_pairs());
  const auto nn = static_cast<double>(stats.negative_pairs());
  const double width = (stats.bin_hi - stats.bin_lo) / static_cast<double>(stats.bin_count);
  out << "bin_lo,bin_hi,pos_count,pos_fraction,neg_count,neg_fraction\n";
  for (std::size_t b = 0; b < stats.bin_count; ++b) {
    const double lo = stats.bin_lo + width * static_cast<double>(b);
    out << format_double(lo) << ',' << format_double(lo + width) << ',' << stats.pos_bins[b] << ','
        << format_double(static_cast<double>(stats.pos_bins[b]) / np) << ',' << stats.neg_bins[b]
        << ',' << format_double(static_cast<double>(stats.neg_bins[b]) / nn) << '\n';
  }
}

}  // namespace hdc
