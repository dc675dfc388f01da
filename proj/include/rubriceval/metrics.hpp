#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "rubriceval/dataset.hpp"
#include "rubriceval/rubric.hpp"
#include "rubriceval/scoring.hpp"

namespace rubriceval {

// k x k contingency table with rows = reference labels and columns =
// predicted labels, category order fixed at construction.
class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(std::vector<std::string> categories);

  static ConfusionMatrix from_labels(std::span<const std::string> reference,
                                     std::span<const std::string> predicted,
                                     std::vector<std::string> categories);
  static ConfusionMatrix from_counts(std::vector<std::string> categories,
                                     std::vector<std::vector<std::int64_t>> counts);

  // CSV layout, importable/exportable for offline analysis:
  //   ,catA,catB
  //   catA,70,2
  //   catB,11,17
  static ConfusionMatrix from_csv(std::istream& in);
  static ConfusionMatrix from_csv_file(const std::filesystem::path& path);
  void to_csv(std::ostream& out) const;

  void add(const std::string& reference, const std::string& predicted);
  void add_index(std::size_t reference, std::size_t predicted, std::int64_t count = 1);

  const std::vector<std::string>& categories() const { return categories_; }
  std::size_t size() const { return categories_.size(); }
  std::int64_t at(std::size_t reference, std::size_t predicted) const;
  std::int64_t total() const;
  std::int64_t diagonal() const;
  std::int64_t row_total(std::size_t reference) const;
  std::int64_t column_total(std::size_t predicted) const;

  double accuracy() const;  // diagonal / total; throws on empty matrix
  std::vector<double> reference_marginal() const;  // row sums, normalized
  std::vector<double> predicted_marginal() const;  // column sums, normalized

 private:
  std::size_t index_of(const std::string& category) const;

  std::vector<std::string> categories_;
  std::vector<std::vector<std::int64_t>> counts_;
};

// Chance-corrected agreement, kappa = (p_o - p_e)/(1 - p_e) with p_e from
// the marginal products. Degenerate case: when p_e = 1 (all mass in one
// category pair) the correction is impossible; perfect observed agreement
// is defined as 0 (no evidence beyond chance), disagreement throws.
double cohen_kappa(const ConfusionMatrix& m);

// Quadratic weighted kappa for ordered categories: disagreement weights
// w_ij = (i-j)^2/(k-1)^2, kappa_w = 1 - sum(w*observed)/sum(w*expected).
// Equals cohen_kappa when k = 2.
double weighted_kappa(const ConfusionMatrix& m);

// Fraction of pairs within one ordinal step of the reference.
double adjacent_accuracy(const ConfusionMatrix& m);

// Earth mover's distance between two distributions over the same ordered
// support, in scale-step units: sum of |CDF_ref - CDF_pred| over the first
// k-1 categories. Inputs may be counts; they are normalized first.
double ordinal_emd(std::span<const double> reference_marginal,
                   std::span<const double> predicted_marginal);

struct RankCorrelations {
  // Each is absent when its denominator degenerates (zero variance / all
  // pairs tied). Never reported as 0.
  std::optional<double> spearman;
  std::optional<double> kendall;  // tau-b
  std::optional<double> pearson;
};

RankCorrelations rank_correlations(std::span<const double> x, std::span<const double> y);

struct ScoreErrors {
  double rmse = 0.0;
  double mae = 0.0;
  double mean_bias = 0.0;  // mean(predicted - reference)
  bool bias_significant = false;
  // Two-sided one-sample t-test of the residuals against 0 at alpha=0.05;
  // absent when n < 2 (no variance estimate).
  std::optional<double> bias_p_value;
};

ScoreErrors score_errors(std::span<const double> reference,
                         std::span<const double> predicted);

// Two-sided p-value of Student's t with `df` degrees of freedom. Exposed
// because the bias test above depends on it and it is independently
// testable against tabulated critical values.
double student_t_two_sided_p(double t, double df);

// ICC(2,1): two-way random effects, absolute agreement, single rater.
// ratings[i][j] = rater j's score for item i; rectangular, no missing
// cells, >= 2 items and >= 2 raters. Throws Error when the ANOVA
// denominator degenerates to 0.
double icc_2_1(const std::vector<std::vector<double>>& ratings);

// Percentile bootstrap CI for an arbitrary statistic of a sample.
// Resample indices are pre-generated from the seed, so the result is
// deterministic no matter how callers parallelize.
std::pair<double, double> bootstrap_ci(
    const std::function<double(std::span<const double>)>& statistic,
    std::span<const double> sample, int n_resamples = 1000, double level = 0.95,
    std::uint64_t seed = 0);

// Exact two-sided McNemar test on discordant pair counts (b improved,
// c degraded): p = min(1, 2 * P(X <= min(b,c))), X ~ Binomial(b+c, 1/2).
// b + c = 0 returns 1 by convention.
double mcnemar_exact(std::int64_t b, std::int64_t c);

struct PermutationTestResult {
  double p_value = 1.0;
  double mean_diff = 0.0;
  double cohens_d = 0.0;  // mean/sd of the differences; 0 when sd is 0
};

// Two-sided paired sign-flip permutation test on score differences:
// p = (1 + #{|mean*| >= |mean|}) / (n_permutations + 1).
PermutationTestResult paired_permutation_test(std::span<const double> diffs,
                                              int n_permutations = 9999,
                                              std::uint64_t seed = 0);

// ---------------------------------------------------------------------------
// Rollup of everything above for one evaluation run against ground truth.

struct CriterionMetrics {
  std::string criterion_id;
  ScaleType scale_type = ScaleType::Binary;
  int n_pairs = 0;  // labeled items where both sides were assessable
  std::optional<double> accuracy;
  std::optional<double> precision;  // binary only, MET = positive class
  std::optional<double> recall;
  std::optional<double> f1;
  std::optional<double> kappa;  // quadratic-weighted for ordinal scales
  std::optional<double> adjacent_accuracy;  // ordinal only
  std::optional<double> emd;                // ordinal only
};

struct PooledCriterionMetrics {
  int n_pairs = 0;
  std::optional<double> accuracy;   // micro over all criterion pairs
  std::optional<double> precision;  // micro over binary criteria
  std::optional<double> recall;
  std::optional<double> f1;
  std::optional<double> mean_kappa;  // unweighted mean of defined per-criterion kappas
};

struct ScoreLevelMetrics {
  int n_items = 0;
  std::optional<double> rmse;
  std::optional<double> mae;
  std::optional<double> spearman;
  std::optional<double> kendall;
  std::optional<double> pearson;
  std::optional<double> icc_2_1;  // reference and prediction as two raters
  std::optional<double> mean_bias;
  bool bias_significant = false;
};

struct BootstrapIntervals {
  int n_resamples = 0;
  double level = 0.95;
  std::optional<std::pair<double, double>> accuracy;
  std::optional<std::pair<double, double>> mean_kappa;
  std::optional<std::pair<double, double>> rmse;
};

struct JudgeBreakdown {
  std::string judge_name;
  int n_pairs = 0;
  std::optional<double> accuracy;
  std::optional<double> mean_kappa;
};

struct MetricsSummary {
  int n_items = 0;    // items with both a report and ground truth
  int n_criteria = 0;
  PooledCriterionMetrics pooled;
  std::vector<CriterionMetrics> per_criterion;
  ScoreLevelMetrics scores;
  std::optional<BootstrapIntervals> bootstrap;
  std::optional<double> mean_agreement;  // mean over items; absent single-judge
  std::vector<JudgeBreakdown> per_judge;
};

struct MetricsOptions {
  int n_bootstrap = 1000;  // 0 disables the bootstrap block
  double level = 0.95;
  std::uint64_t seed = 0;
  // Used to roll ground-truth verdicts into reference scores, mirroring
  // whatever the run used for predictions.
  CannotAssessConfig cannot_assess;
};

// Joins reports to dataset items by item_id; items lacking either side are
// left out. Bootstrap resampling is over items.
MetricsSummary compute_metrics(const Rubric& rubric,
                               std::span<const EnsembleEvaluationReport> reports,
                               const RubricDataset& dataset,
                               const MetricsOptions& options = {});

// Undefined statistics are omitted, not serialized as 0/null.
nlohmann::json metrics_to_json(const MetricsSummary& summary);

}  // namespace rubriceval
