#ifndef HDC_EVAL_HPP_
#define HDC_EVAL_HPP_

#include <cstddef>
#include <iosfwd>
#include <map>
#include <span>
#include <vector>

#include "hdc/error.hpp"
#include "hdc/matrix.hpp"

namespace hdc {

class EvaluationError : public Error {
 public:
  using Error::Error;
};

/// Query label has no match in the database, so AP is undefined.
class UndefinedApError : public EvaluationError {
 public:
  using EvaluationError::EvaluationError;
};

struct RetrievalSet {
  const Matrix& queries;
  std::span<const int> query_labels;
  const Matrix& database;
  std::span<const int> database_labels;
  /// Query i is database item i and must not retrieve itself.
  bool exclude_self = false;
};

/**
 * Database indices of one query ordered by ascending Euclidean distance,
 * ties by ascending index, with the query itself dropped when exclude_self.
 */
std::vector<std::size_t> rank_database(const RetrievalSet& set, std::size_t query);

/// Fraction of queries with a same-label item among their top k, for each k.
std::map<std::size_t, double> recall_at_k(const RetrievalSet& set, std::span<const std::size_t> ks,
                                          std::size_t workers = 1);

/**
 * Mean over queries of average precision over the full ranking. Throws
 * UndefinedApError for a query whose label is absent from the database,
 * unless skip_undefined is set, in which case such queries are left out.
 */
double mean_average_precision(const RetrievalSet& set, bool skip_undefined = false,
                              std::size_t workers = 1);

/// AP of a single ranked relevance list; `relevant` must contain a true entry.
double average_precision(const std::vector<bool>& relevant);

struct HistogramStats {
  double m_pos = 0.0;
  double v_pos = 0.0;
  double m_neg = 0.0;
  double v_neg = 0.0;
  std::vector<std::size_t> pos_bins;
  std::vector<std::size_t> neg_bins;
  double bin_lo = 0.0;
  double bin_hi = 2.0;
  std::size_t bin_count = 100;

  std::size_t positive_pairs() const;
  std::size_t negative_pairs() const;
};

/**
 * Distances over every unordered pair (i < j), split by label agreement.
 * Means and population variances; values outside [lo, hi] land in the edge
 * bins. Throws EvaluationError without at least one pair of each kind.
 */
HistogramStats distance_histograms(const Matrix& descriptors, std::span<const int> labels,
                                   std::size_t bin_count = 100, double bin_lo = 0.0,
                                   double bin_hi = 2.0);

/// |m- - m+|^2 / (v+ + v-). Throws EvaluationError when v+ + v- is zero.
double lda_score(double m_pos, double v_pos, double m_neg, double v_neg);
double lda_score(const HistogramStats& stats);

/// Sum over bins of min(pos share, neg share), each polarity normalized to 1.
double histogram_overlap(const HistogramStats& stats);

struct EvalReport {
  std::map<std::size_t, double> recall_at;
  double map_score = 0.0;
  HistogramStats histogram;
  double lda = 0.0;
};

struct EvalOptions {
  std::vector<std::size_t> ks = {1, 2, 4, 8, 16, 32};
  std::size_t bin_count = 100;
  double bin_lo = 0.0;
  double bin_hi = 2.0;
  bool skip_undefined_ap = false;
  std::size_t workers = 1;
};

/// Leave-one-out retrieval of a labelled descriptor set against itself.
EvalReport evaluate(const Matrix& descriptors, std::span<const int> labels,
                    const EvalOptions& options = {});

/// `key: value` lines: recall@k, map, m_pos, v_pos, m_neg, v_neg, lda, overlap.
void write_report_text(std::ostream& out, const EvalReport& report);
/// `k,recall` rows.
void write_recall_csv(std::ostream& out, const EvalReport& report);
/// `bin_lo,bin_hi,pos_count,pos_fraction,neg_count,neg_fraction` rows.
void write_histogram_csv(std::ostream& out, const HistogramStats& stats);

}  // namespace hdc

#endif  // HDC_EVAL_HPP_
