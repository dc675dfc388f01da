#include "rubriceval/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <numeric>
#include <set>
#include <ostream>
#include <sstream>

#include "rubriceval/rng.hpp"

namespace rubriceval {

namespace {

constexpr double kBiasAlpha = 0.05;

double mean_of(std::span<const double> values) {
  return std::accumulate(values.begin(), values.end(), 0.0) /
         static_cast<double>(values.size());
}

// Sample standard deviation (n-1 denominator).
double sample_sd(std::span<const double> values, double mean) {
  if (values.size() < 2) return 0.0;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / static_cast<double>(values.size() - 1));
}

// Regularized incomplete beta I_x(a,b) via the continued-fraction expansion
// (Lentz's method). Standard numerics; accurate to ~1e-12 for the a,b we
// use (t-distribution tails).
double betacf(double a, double b, double x) {
  constexpr int kMaxIterations = 300;
  constexpr double kEpsilon = 3e-14;
  constexpr double kFloor = 1e-300;

  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kFloor) d = kFloor;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIterations; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kFloor) d = kFloor;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kFloor) c = kFloor;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kFloor) d = kFloor;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kFloor) c = kFloor;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEpsilon) break;
  }
  return h;
}

double incomplete_beta(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                          a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(ln_front);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return front * betacf(a, b, x) / a;
  }
  return 1.0 - front * betacf(b, a, 1.0 - x) / b;
}

}  // namespace

ConfusionMatrix::ConfusionMatrix(std::vector<std::string> categories)
    : categories_(std::move(categories)),
      counts_(categories_.size(), std::vector<std::int64_t>(categories_.size(), 0)) {
  if (categories_.empty()) {
    throw ConfigError("confusion matrix needs at least one category");
  }
}

ConfusionMatrix ConfusionMatrix::from_labels(std::span<const std::string> reference,
                                             std::span<const std::string> predicted,
                                             std::vector<std::string> categories) {
  if (reference.size() != predicted.size()) {
    throw ConfigError("label list lengths differ: " + std::to_string(reference.size()) +
                      " vs " + std::to_string(predicted.size()));
  }
  ConfusionMatrix m(std::move(categories));
  for (std::size_t i = 0; i < reference.size(); ++i) {
    m.add(reference[i], predicted[i]);
  }
  return m;
}

ConfusionMatrix ConfusionMatrix::from_counts(
    std::vector<std::string> categories, std::vector<std::vector<std::int64_t>> counts) {
  ConfusionMatrix m(std::move(categories));
  if (counts.size() != m.size()) {
    throw ConfigError("count matrix has " + std::to_string(counts.size()) +
                      " rows for " + std::to_string(m.size()) + " categories");
  }
  for (std::size_t r = 0; r < counts.size(); ++r) {
    if (counts[r].size() != m.size()) {
      throw ConfigError("count matrix row " + std::to_string(r) + " has " +
                        std::to_string(counts[r].size()) + " columns");
    }
    for (std::size_t p = 0; p < counts[r].size(); ++p) {
      if (counts[r][p] < 0) {
        throw ConfigError("negative count at [" + std::to_string(r) + "][" +
                          std::to_string(p) + "]");
      }
      m.counts_[r][p] = counts[r][p];
    }
  }
  return m;
}

ConfusionMatrix ConfusionMatrix::from_csv(std::istream& in) {
  auto split_line = [](const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream row(line);
    while (std::getline(row, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
  };

  std::string line;
  if (!std::getline(in, line)) {
    throw LoadError("confusion matrix csv is empty");
  }
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::vector<std::string> header = split_line(line);
  if (header.size() < 2) {
    throw LoadError("confusion matrix csv header needs category columns");
  }
  std::vector<std::string> categories(header.begin() + 1, header.end());

  std::vector<std::vector<std::int64_t>> counts;
  std::size_t row_index = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::vector<std::string> cells = split_line(line);
    if (cells.size() != categories.size() + 1) {
      throw LoadError("confusion matrix csv row " + std::to_string(row_index + 1) +
                      " has " + std::to_string(cells.size()) + " cells, expected " +
                      std::to_string(categories.size() + 1));
    }
    if (row_index >= categories.size() || cells[0] != categories[row_index]) {
      throw LoadError("confusion matrix csv row label \"" + cells[0] +
                      "\" does not match header order");
    }
    std::vector<std::int64_t> row;
    for (std::size_t i = 1; i < cells.size(); ++i) {
      try {
        row.push_back(std::stoll(cells[i]));
      } catch (const std::exception&) {
        throw LoadError("confusion matrix csv cell \"" + cells[i] + "\" is not a count");
      }
    }
    counts.push_back(std::move(row));
    ++row_index;
  }
  if (counts.size() != categories.size()) {
    throw LoadError("confusion matrix csv has " + std::to_string(counts.size()) +
                    " rows for " + std::to_string(categories.size()) + " categories");
  }
  return from_counts(std::move(categories), std::move(counts));
}

ConfusionMatrix ConfusionMatrix::from_csv_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw LoadError("cannot open confusion matrix csv: " + path.string());
  }
  return from_csv(in);
}

void ConfusionMatrix::to_csv(std::ostream& out) const {
  for (const std::string& category : categories_) {
    out << ',' << category;
  }
  out << '\n';
  for (std::size_t r = 0; r < size(); ++r) {
    out << categories_[r];
    for (std::size_t p = 0; p < size(); ++p) {
      out << ',' << counts_[r][p];
    }
    out << '\n';
  }
}

std::size_t ConfusionMatrix::index_of(const std::string& category) const {
  for (std::size_t i = 0; i < categories_.size(); ++i) {
    if (categories_[i] == category) return i;
  }
  throw ConfigError("label \"" + category + "\" is not a matrix category");
}

void ConfusionMatrix::add(const std::string& reference, const std::string& predicted) {
  add_index(index_of(reference), index_of(predicted));
}

void ConfusionMatrix::add_index(std::size_t reference, std::size_t predicted,
                                std::int64_t count) {
  counts_.at(reference).at(predicted) += count;
}

std::int64_t ConfusionMatrix::at(std::size_t reference, std::size_t predicted) const {
  return counts_.at(reference).at(predicted);
}

std::int64_t ConfusionMatrix::total() const {
  std::int64_t total = 0;
  for (const auto& row : counts_) {
    for (std::int64_t c : row) total += c;
  }
  return total;
}

std::int64_t ConfusionMatrix::diagonal() const {
  std::int64_t sum = 0;
  for (std::size_t i = 0; i < size(); ++i) sum += counts_[i][i];
  return sum;
}

std::int64_t ConfusionMatrix::row_total(std::size_t reference) const {
  std::int64_t sum = 0;
  for (std::int64_t c : counts_.at(reference)) sum += c;
  return sum;
}

std::int64_t ConfusionMatrix::column_total(std::size_t predicted) const {
  std::int64_t sum = 0;
  for (std::size_t r = 0; r < size(); ++r) sum += counts_[r].at(predicted);
  return sum;
}

double ConfusionMatrix::accuracy() const {
  const std::int64_t n = total();
  if (n == 0) throw Error("accuracy undefined on an empty confusion matrix");
  return static_cast<double>(diagonal()) / static_cast<double>(n);
}

std::vector<double> ConfusionMatrix::reference_marginal() const {
  const auto n = static_cast<double>(total());
  if (n == 0) throw Error("marginal undefined on an empty confusion matrix");
  std::vector<double> out(size());
  for (std::size_t r = 0; r < size(); ++r) {
    out[r] = static_cast<double>(row_total(r)) / n;
  }
  return out;
}

std::vector<double> ConfusionMatrix::predicted_marginal() const {
  const auto n = static_cast<double>(total());
  if (n == 0) throw Error("marginal undefined on an empty confusion matrix");
  std::vector<double> out(size());
  for (std::size_t p = 0; p < size(); ++p) {
    out[p] = static_cast<double>(column_total(p)) / n;
  }
  return out;
}

double cohen_kappa(const ConfusionMatrix& m) {
  const auto n = static_cast<double>(m.total());
  if (n == 0) throw Error("kappa undefined on an empty confusion matrix");
  const double p_o = m.accuracy();
  double p_e = 0.0;
  for (std::size_t i = 0; i < m.size(); ++i) {
    p_e += (static_cast<double>(m.row_total(i)) / n) *
           (static_cast<double>(m.column_total(i)) / n);
  }
  if (p_e >= 1.0) {
    if (p_o >= 1.0) return 0.0;  // single-category data: no chance correction
    throw Error("kappa degenerate: chance agreement 1 with observed disagreement");
  }
  return (p_o - p_e) / (1.0 - p_e);
}

double weighted_kappa(const ConfusionMatrix& m) {
  const std::size_t k = m.size();
  if (k < 2) throw Error("weighted kappa needs at least 2 ordered categories");
  const auto n = static_cast<double>(m.total());
  if (n == 0) throw Error("kappa undefined on an empty confusion matrix");

  const double denom = static_cast<double>((k - 1) * (k - 1));
  double observed = 0.0;
  double expected = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      const double d = static_cast<double>(i) - static_cast<double>(j);
      const double w = d * d / denom;
      observed += w * static_cast<double>(m.at(i, j)) / n;
      expected += w * (static_cast<double>(m.row_total(i)) / n) *
                  (static_cast<double>(m.column_total(j)) / n);
    }
  }
  if (expected == 0.0) {
    if (observed == 0.0) return 0.0;  // all mass in one category
    throw Error("weighted kappa degenerate: expected disagreement 0");
  }
  return 1.0 - observed / expected;
}

double adjacent_accuracy(const ConfusionMatrix& m) {
  const std::int64_t n = m.total();
  if (n == 0) throw Error("adjacent accuracy undefined on an empty confusion matrix");
  std::int64_t near = 0;
  for (std::size_t i = 0; i < m.size(); ++i) {
    for (std::size_t j = 0; j < m.size(); ++j) {
      const auto d = static_cast<std::int64_t>(i) - static_cast<std::int64_t>(j);
      if (d >= -1 && d <= 1) near += m.at(i, j);
    }
  }
  return static_cast<double>(near) / static_cast<double>(n);
}

double ordinal_emd(std::span<const double> reference_marginal,
                   std::span<const double> predicted_marginal) {
  if (reference_marginal.size() != predicted_marginal.size()) {
    throw ConfigError("EMD marginals have different category counts");
  }
  if (reference_marginal.empty()) {
    throw ConfigError("EMD needs at least one category");
  }
  double ref_sum = 0.0;
  double pred_sum = 0.0;
  for (double v : reference_marginal) ref_sum += v;
  for (double v : predicted_marginal) pred_sum += v;
  if (ref_sum <= 0.0 || pred_sum <= 0.0) {
    throw ConfigError("EMD marginals must have positive mass");
  }
  double emd = 0.0;
  double ref_cdf = 0.0;
  double pred_cdf = 0.0;
  for (std::size_t j = 0; j + 1 < reference_marginal.size(); ++j) {
    ref_cdf += reference_marginal[j] / ref_sum;
    pred_cdf += predicted_marginal[j] / pred_sum;
    emd += std::fabs(ref_cdf - pred_cdf);
  }
  return emd;
}

namespace {

std::vector<double> average_ranks(std::span<const double> values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&values](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    // Tied block [i, j] shares the average of ranks i+1 .. j+1.
    const double shared = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = shared;
    i = j + 1;
  }
  return ranks;
}

std::optional<double> pearson_of(std::span<const double> x, std::span<const double> y) {
  const double mx = mean_of(x);
  const double my = mean_of(y);
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return std::nullopt;
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace

RankCorrelations rank_correlations(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) {
    throw ConfigError("correlation inputs have different lengths");
  }
  if (x.size() < 2) {
    throw ConfigError("correlations need at least 2 pairs");
  }
  RankCorrelations out;
  out.pearson = pearson_of(x, y);
  out.spearman = pearson_of(average_ranks(x), average_ranks(y));

  // Kendall tau-b. O(n^2) is fine at the item counts this library sees.
  const std::size_t n = x.size();
  std::int64_t concordant = 0;
  std::int64_t discordant = 0;
  std::int64_t ties_x = 0;
  std::int64_t ties_y = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double dx = x[i] - x[j];
      const double dy = y[i] - y[j];
      if (dx == 0.0 && dy == 0.0) {
        ++ties_x;
        ++ties_y;
      } else if (dx == 0.0) {
        ++ties_x;
      } else if (dy == 0.0) {
        ++ties_y;
      } else if ((dx > 0.0) == (dy > 0.0)) {
        ++concordant;
      } else {
        ++discordant;
      }
    }
  }
  const auto n0 = static_cast<double>(n * (n - 1) / 2);
  const double denom = std::sqrt((n0 - static_cast<double>(ties_x)) *
                                 (n0 - static_cast<double>(ties_y)));
  if (denom > 0.0) {
    out.kendall = static_cast<double>(concordant - discordant) / denom;
  }
  return out;
}

double student_t_two_sided_p(double t, double df) {
  if (df <= 0.0) throw ConfigError("t-test needs positive degrees of freedom");
  if (std::isinf(t)) return 0.0;
  const double x = df / (df + t * t);
  return incomplete_beta(df / 2.0, 0.5, x);
}

ScoreErrors score_errors(std::span<const double> reference,
                         std::span<const double> predicted) {
  if (reference.size() != predicted.size()) {
    throw ConfigError("score lists have different lengths");
  }
  if (reference.empty()) {
    throw ConfigError("score errors need at least one pair");
  }
  ScoreErrors out;
  std::vector<double> residuals(reference.size());
  double se = 0.0;
  double ae = 0.0;
  for (std::size_t i = 0; i < reference.size(); ++i) {
    const double r = predicted[i] - reference[i];
    residuals[i] = r;
    se += r * r;
    ae += std::fabs(r);
  }
  const auto n = static_cast<double>(reference.size());
  out.rmse = std::sqrt(se / n);
  out.mae = ae / n;
  out.mean_bias = mean_of(residuals);

  if (residuals.size() >= 2) {
    const double sd = sample_sd(residuals, out.mean_bias);
    if (sd == 0.0) {
      // Zero spread: any nonzero offset is exactly reproduced every time.
      out.bias_significant = out.mean_bias != 0.0;
      out.bias_p_value = out.mean_bias != 0.0 ? 0.0 : 1.0;
    } else {
      const double t = out.mean_bias / (sd / std::sqrt(n));
      const double p = student_t_two_sided_p(t, n - 1.0);
      out.bias_p_value = p;
      out.bias_significant = p < kBiasAlpha;
    }
  }
  return out;
}

double icc_2_1(const std::vector<std::vector<double>>& ratings) {
  const std::size_t n = ratings.size();
  if (n < 2) throw ConfigError("ICC needs at least 2 items");
  const std::size_t k = ratings[0].size();
  if (k < 2) throw ConfigError("ICC needs at least 2 raters");
  for (const auto& row : ratings) {
    if (row.size() != k) throw ConfigError("ICC ratings matrix is ragged");
  }

  double grand = 0.0;
  std::vector<double> row_mean(n, 0.0);
  std::vector<double> col_mean(k, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      grand += ratings[i][j];
      row_mean[i] += ratings[i][j];
      col_mean[j] += ratings[i][j];
    }
  }
  grand /= static_cast<double>(n * k);
  for (double& m : row_mean) m /= static_cast<double>(k);
  for (double& m : col_mean) m /= static_cast<double>(n);

  double ss_rows = 0.0;
  for (double m : row_mean) ss_rows += (m - grand) * (m - grand);
  double ss_cols = 0.0;
  for (double m : col_mean) ss_cols += (m - grand) * (m - grand);
  double ss_error = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      const double r = ratings[i][j] - row_mean[i] - col_mean[j] + grand;
      ss_error += r * r;
    }
  }

  const double ms_rows = static_cast<double>(k) * ss_rows / static_cast<double>(n - 1);
  const double ms_cols = static_cast<double>(n) * ss_cols / static_cast<double>(k - 1);
  const double ms_error = ss_error / static_cast<double>((n - 1) * (k - 1));

  const double denominator = ms_rows + static_cast<double>(k - 1) * ms_error +
                             static_cast<double>(k) * (ms_cols - ms_error) /
                                 static_cast<double>(n);
  if (denominator == 0.0) {
    throw Error("ICC degenerate: zero variance in ratings");
  }
  return (ms_rows - ms_error) / denominator;
}

namespace {

// Quantile of a sorted vector with linear interpolation between order
// statistics (the common "linear" definition).
double sorted_quantile(const std::vector<double>& sorted, double q) {
  if (sorted.size() == 1) return sorted[0];
  const double position = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(position);
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double fraction = position - static_cast<double>(lo);
  return sorted[lo] + fraction * (sorted[hi] - sorted[lo]);
}

}  // namespace

std::pair<double, double> bootstrap_ci(
    const std::function<double(std::span<const double>)>& statistic,
    std::span<const double> sample, int n_resamples, double level, std::uint64_t seed) {
  if (sample.empty()) throw ConfigError("bootstrap needs a non-empty sample");
  if (n_resamples < 1) throw ConfigError("bootstrap needs at least 1 resample");
  if (level <= 0.0 || level >= 1.0) {
    throw ConfigError("bootstrap level must be inside (0,1)");
  }

  // All indices come from the seed up front; evaluation order cannot change
  // the draw.
  SplitMix64 rng(seed);
  const std::size_t n = sample.size();
  std::vector<double> stats(static_cast<std::size_t>(n_resamples));
  std::vector<double> resample(n);
  for (int b = 0; b < n_resamples; ++b) {
    for (std::size_t i = 0; i < n; ++i) {
      resample[i] = sample[static_cast<std::size_t>(rng.below(n))];
    }
    stats[static_cast<std::size_t>(b)] = statistic(resample);
  }
  std::sort(stats.begin(), stats.end());
  const double tail = (1.0 - level) / 2.0;
  return {sorted_quantile(stats, tail), sorted_quantile(stats, 1.0 - tail)};
}

double mcnemar_exact(std::int64_t b, std::int64_t c) {
  if (b < 0 || c < 0) throw ConfigError("discordant counts must be non-negative");
  const std::int64_t n = b + c;
  if (n == 0) return 1.0;
  const std::int64_t m = std::min(b, c);
  // P(X <= m) for X ~ Binomial(n, 1/2), summed in log space for stability.
  double tail = 0.0;
  for (std::int64_t i = 0; i <= m; ++i) {
    const double log_pmf = std::lgamma(static_cast<double>(n) + 1.0) -
                           std::lgamma(static_cast<double>(i) + 1.0) -
                           std::lgamma(static_cast<double>(n - i) + 1.0) -
                           static_cast<double>(n) * std::log(2.0);
    tail += std::exp(log_pmf);
  }
  return std::min(1.0, 2.0 * tail);
}

PermutationTestResult paired_permutation_test(std::span<const double> diffs,
                                              int n_permutations, std::uint64_t seed) {
  if (diffs.size() < 2) {
    throw ConfigError("permutation test needs at least 2 paired differences");
  }
  if (n_permutations < 1) {
    throw ConfigError("permutation test needs at least 1 permutation");
  }
  PermutationTestResult out;
  out.mean_diff = mean_of(diffs);
  const double sd = sample_sd(diffs, out.mean_diff);
  out.cohens_d = sd == 0.0 ? 0.0 : out.mean_diff / sd;

  bool all_zero = true;
  for (double d : diffs) {
    if (d != 0.0) {
      all_zero = false;
      break;
    }
  }
  if (all_zero) {
    out.p_value = 1.0;
    return out;
  }

  const double observed = std::fabs(out.mean_diff);
  const auto n = static_cast<double>(diffs.size());
  SplitMix64 rng(seed);
  int at_least_as_extreme = 0;
  for (int p = 0; p < n_permutations; ++p) {
    double sum = 0.0;
    for (double d : diffs) {
      sum += (rng.next() & 1ULL) ? d : -d;
    }
    if (std::fabs(sum / n) >= observed) ++at_least_as_extreme;
  }
  out.p_value = (1.0 + static_cast<double>(at_least_as_extreme)) /
                (static_cast<double>(n_permutations) + 1.0);
  return out;
}

// ---------------------------------------------------------------------------

namespace {

// One joined (reference, predicted) category pair for a criterion.
struct LabeledPair {
  std::size_t criterion;  // index into the rubric
  int ref_category;
  int pred_category;
};

struct JoinedItem {
  std::vector<LabeledPair> pairs;
  std::optional<double> ref_score;
  std::optional<double> pred_score;
};

// Non-na option index -> dense category position for a choice criterion.
std::vector<int> category_positions(const Criterion& criterion) {
  std::vector<int> position(criterion.options.size(), -1);
  int next = 0;
  for (std::size_t i = 0; i < criterion.options.size(); ++i) {
    if (!criterion.options[i].na) position[i] = next++;
  }
  return position;
}

std::vector<std::string> category_names(const Criterion& criterion) {
  if (criterion.scale_type == ScaleType::Binary) return {"MET", "UNMET"};
  std::vector<std::string> names;
  for (const CriterionOption& opt : criterion.options) {
    if (!opt.na) names.push_back(opt.label);
  }
  return names;
}

// Category index for metric purposes, or -1 when the verdict carries no
// assessable category (CANNOT_ASSESS / na option).
int category_of(const Verdict& verdict, const std::vector<int>& positions) {
  switch (verdict.kind()) {
    case Verdict::Kind::CannotAssess:
      return -1;
    case Verdict::Kind::Met:
      return 0;
    case Verdict::Kind::Unmet:
      return 1;
    case Verdict::Kind::Choice:
      return positions[static_cast<std::size_t>(verdict.choice_index())];
  }
  throw Error("unreachable verdict kind");
}

ConfusionMatrix empty_matrix(const Criterion& criterion) {
  return ConfusionMatrix(category_names(criterion));
}

std::optional<double> criterion_kappa(const Criterion& criterion,
                                      const ConfusionMatrix& m) {
  try {
    return criterion.scale_type == ScaleType::Ordinal ? weighted_kappa(m)
                                                      : cohen_kappa(m);
  } catch (const Error&) {
    return std::nullopt;  // degenerate marginals: absent, never 0
  }
}

struct PooledCounts {
  std::int64_t pairs = 0;
  std::int64_t correct = 0;
  std::int64_t tp = 0;  // binary criteria only
  std::int64_t fp = 0;
  std::int64_t fn = 0;

  void add(const Criterion& criterion, int ref, int pred) {
    ++pairs;
    if (ref == pred) ++correct;
    if (criterion.scale_type == ScaleType::Binary) {
      if (ref == 0 && pred == 0) ++tp;
      if (ref != 0 && pred == 0) ++fp;
      if (ref == 0 && pred != 0) ++fn;
    }
  }
};

void fill_pooled(const PooledCounts& counts, PooledCriterionMetrics& out) {
  out.n_pairs = static_cast<int>(counts.pairs);
  if (counts.pairs > 0) {
    out.accuracy = static_cast<double>(counts.correct) / static_cast<double>(counts.pairs);
  }
  if (counts.tp + counts.fp > 0) {
    out.precision = static_cast<double>(counts.tp) / static_cast<double>(counts.tp + counts.fp);
  }
  if (counts.tp + counts.fn > 0) {
    out.recall = static_cast<double>(counts.tp) / static_cast<double>(counts.tp + counts.fn);
  }
  if (out.precision.has_value() && out.recall.has_value() &&
      *out.precision + *out.recall > 0.0) {
    out.f1 = 2.0 * *out.precision * *out.recall / (*out.precision + *out.recall);
  }
}

}  // namespace

MetricsSummary compute_metrics(const Rubric& rubric,
                               std::span<const EnsembleEvaluationReport> reports,
                               const RubricDataset& dataset,
                               const MetricsOptions& options) {
  ensure_valid(rubric);

  std::map<std::string, const EnsembleEvaluationReport*> report_by_id;
  for (const EnsembleEvaluationReport& report : reports) {
    report_by_id[report.item_id] = &report;
  }

  std::vector<std::vector<int>> positions;
  positions.reserve(rubric.size());
  for (std::size_t c = 0; c < rubric.size(); ++c) {
    positions.push_back(category_positions(rubric.at(c)));
  }

  // Join reports to labeled items once; everything downstream (including
  // the bootstrap) reuses this.
  std::vector<JoinedItem> joined;
  std::vector<double> agreements;
  std::set<std::string> judge_names;
  std::map<std::string, PooledCounts> judge_counts;
  std::map<std::string, std::vector<ConfusionMatrix>> judge_matrices;

  for (const DatasetItem& item : dataset.items) {
    auto found = report_by_id.find(item.item_id);
    if (found == report_by_id.end()) continue;
    const EnsembleEvaluationReport& report = *found->second;
    if (report.mean_agreement.has_value()) {
      agreements.push_back(*report.mean_agreement);
    }
    const std::optional<std::vector<Verdict>> truth =
        ground_truth_verdicts(rubric, item);
    if (!truth.has_value()) continue;
    if (report.criteria.size() != rubric.size()) {
      throw ConfigError("report for item \"" + item.item_id + "\" has " +
                        std::to_string(report.criteria.size()) + " criteria, rubric has " +
                        std::to_string(rubric.size()));
    }

    JoinedItem j;
    for (std::size_t c = 0; c < rubric.size(); ++c) {
      const Criterion& criterion = rubric.at(c);
      const int ref = category_of((*truth)[c], positions[c]);
      if (ref < 0) continue;  // na ground truth: nothing to compare against
      const int pred = category_of(report.criteria[c].verdict, positions[c]);
      if (pred >= 0) {
        j.pairs.push_back({c, ref, pred});
      }
      for (const JudgeVote& vote : report.criteria[c].votes) {
        judge_names.insert(vote.judge_name);
        const int judge_pred = category_of(vote.verdict, positions[c]);
        if (judge_pred < 0) continue;
        auto [it, inserted] = judge_matrices.try_emplace(vote.judge_name);
        if (inserted) {
          for (std::size_t cc = 0; cc < rubric.size(); ++cc) {
            it->second.push_back(empty_matrix(rubric.at(cc)));
          }
        }
        it->second[c].add_index(static_cast<std::size_t>(ref),
                                static_cast<std::size_t>(judge_pred));
        judge_counts[vote.judge_name].add(criterion, ref, judge_pred);
      }
    }

    try {
      std::vector<CriterionOutcome> outcomes;
      outcomes.reserve(rubric.size());
      for (const Verdict& v : *truth) outcomes.push_back({v, std::nullopt});
      j.ref_score = aggregate_score(rubric, outcomes, options.cannot_assess);
      j.pred_score = report.score;
    } catch (const UndefinedScoreError&) {
      // Item contributes criterion pairs but no score pair.
    }
    joined.push_back(std::move(j));
  }

  MetricsSummary summary;
  summary.n_items = static_cast<int>(joined.size());
  summary.n_criteria = static_cast<int>(rubric.size());
  if (!agreements.empty()) {
    summary.mean_agreement = mean_of(agreements);
  }

  // Per-criterion confusion matrices over all joined items.
  std::vector<ConfusionMatrix> matrices;
  for (std::size_t c = 0; c < rubric.size(); ++c) {
    matrices.push_back(empty_matrix(rubric.at(c)));
  }
  PooledCounts pooled;
  for (const JoinedItem& j : joined) {
    for (const LabeledPair& pair : j.pairs) {
      matrices[pair.criterion].add_index(static_cast<std::size_t>(pair.ref_category),
                                         static_cast<std::size_t>(pair.pred_category));
      pooled.add(rubric.at(pair.criterion), pair.ref_category, pair.pred_category);
    }
  }
  fill_pooled(pooled, summary.pooled);

  std::vector<double> defined_kappas;
  for (std::size_t c = 0; c < rubric.size(); ++c) {
    const Criterion& criterion = rubric.at(c);
    const ConfusionMatrix& m = matrices[c];
    CriterionMetrics cm;
    cm.criterion_id = criterion.id;
    cm.scale_type = criterion.scale_type;
    cm.n_pairs = static_cast<int>(m.total());
    if (cm.n_pairs > 0) {
      cm.accuracy = m.accuracy();
      if (criterion.scale_type == ScaleType::Binary) {
        const auto tp = static_cast<double>(m.at(0, 0));
        const auto fp = static_cast<double>(m.at(1, 0));
        const auto fn = static_cast<double>(m.at(0, 1));
        if (tp + fp > 0.0) cm.precision = tp / (tp + fp);
        if (tp + fn > 0.0) cm.recall = tp / (tp + fn);
        if (cm.precision.has_value() && cm.recall.has_value() &&
            *cm.precision + *cm.recall > 0.0) {
          cm.f1 = 2.0 * *cm.precision * *cm.recall / (*cm.precision + *cm.recall);
        }
      }
      cm.kappa = criterion_kappa(criterion, m);
      if (cm.kappa.has_value()) defined_kappas.push_back(*cm.kappa);
      if (criterion.scale_type == ScaleType::Ordinal) {
        cm.adjacent_accuracy = adjacent_accuracy(m);
        cm.emd = ordinal_emd(m.reference_marginal(), m.predicted_marginal());
      }
    }
    summary.per_criterion.push_back(std::move(cm));
  }
  if (!defined_kappas.empty()) {
    summary.pooled.mean_kappa = mean_of(defined_kappas);
  }

  // Score-level block.
  std::vector<double> ref_scores;
  std::vector<double> pred_scores;
  for (const JoinedItem& j : joined) {
    if (j.ref_score.has_value() && j.pred_score.has_value()) {
      ref_scores.push_back(*j.ref_score);
      pred_scores.push_back(*j.pred_score);
    }
  }
  summary.scores.n_items = static_cast<int>(ref_scores.size());
  if (!ref_scores.empty()) {
    const ScoreErrors errors = score_errors(ref_scores, pred_scores);
    summary.scores.rmse = errors.rmse;
    summary.scores.mae = errors.mae;
    summary.scores.mean_bias = errors.mean_bias;
    summary.scores.bias_significant = errors.bias_significant;
    if (ref_scores.size() >= 2) {
      const RankCorrelations correlations = rank_correlations(ref_scores, pred_scores);
      summary.scores.spearman = correlations.spearman;
      summary.scores.kendall = correlations.kendall;
      summary.scores.pearson = correlations.pearson;
      std::vector<std::vector<double>> two_raters;
      two_raters.reserve(ref_scores.size());
      for (std::size_t i = 0; i < ref_scores.size(); ++i) {
        two_raters.push_back({ref_scores[i], pred_scores[i]});
      }
      try {
        summary.scores.icc_2_1 = icc_2_1(two_raters);
      } catch (const Error&) {
        // degenerate: absent
      }
    }
  }

  // Per-judge breakdown from individual votes.
  for (const std::string& name : judge_names) {
    JudgeBreakdown breakdown;
    breakdown.judge_name = name;
    const PooledCounts& counts = judge_counts[name];
    breakdown.n_pairs = static_cast<int>(counts.pairs);
    if (counts.pairs > 0) {
      breakdown.accuracy =
          static_cast<double>(counts.correct) / static_cast<double>(counts.pairs);
    }
    std::vector<double> kappas;
    auto it = judge_matrices.find(name);
    if (it != judge_matrices.end()) {
      for (std::size_t c = 0; c < rubric.size(); ++c) {
        if (it->second[c].total() == 0) continue;
        const std::optional<double> k = criterion_kappa(rubric.at(c), it->second[c]);
        if (k.has_value()) kappas.push_back(*k);
      }
    }
    if (!kappas.empty()) breakdown.mean_kappa = mean_of(kappas);
    summary.per_judge.push_back(std::move(breakdown));
  }

  // Item-level bootstrap for the three headline statistics.
  if (options.n_bootstrap > 0 && !joined.empty()) {
    BootstrapIntervals intervals;
    intervals.n_resamples = options.n_bootstrap;
    intervals.level = options.level;

    SplitMix64 rng(options.seed);
    std::vector<double> acc_stats;
    std::vector<double> kappa_stats;
    std::vector<double> rmse_stats;
    const std::size_t n = joined.size();
    std::vector<std::size_t> draw(n);
    for (int b = 0; b < options.n_bootstrap; ++b) {
      for (std::size_t i = 0; i < n; ++i) {
        draw[i] = static_cast<std::size_t>(rng.below(n));
      }
      std::int64_t pairs = 0;
      std::int64_t correct = 0;
      std::vector<ConfusionMatrix> ms;
      for (std::size_t c = 0; c < rubric.size(); ++c) {
        ms.push_back(empty_matrix(rubric.at(c)));
      }
      double se = 0.0;
      std::size_t score_pairs = 0;
      for (std::size_t i : draw) {
        const JoinedItem& j = joined[i];
        for (const LabeledPair& pair : j.pairs) {
          ++pairs;
          if (pair.ref_category == pair.pred_category) ++correct;
          ms[pair.criterion].add_index(static_cast<std::size_t>(pair.ref_category),
                                       static_cast<std::size_t>(pair.pred_category));
        }
        if (j.ref_score.has_value() && j.pred_score.has_value()) {
          const double r = *j.pred_score - *j.ref_score;
          se += r * r;
          ++score_pairs;
        }
      }
      if (pairs > 0) {
        acc_stats.push_back(static_cast<double>(correct) / static_cast<double>(pairs));
      }
      std::vector<double> ks;
      for (std::size_t c = 0; c < rubric.size(); ++c) {
        if (ms[c].total() == 0) continue;
        const std::optional<double> k = criterion_kappa(rubric.at(c), ms[c]);
        if (k.has_value()) ks.push_back(*k);
      }
      if (!ks.empty()) kappa_stats.push_back(mean_of(ks));
      if (score_pairs > 0) {
        rmse_stats.push_back(std::sqrt(se / static_cast<double>(score_pairs)));
      }
    }

    const double tail = (1.0 - options.level) / 2.0;
    auto interval_of = [tail](std::vector<double>& stats)
        -> std::optional<std::pair<double, double>> {
      if (stats.empty()) return std::nullopt;
      std::sort(stats.begin(), stats.end());
      return std::make_pair(sorted_quantile(stats, tail),
                            sorted_quantile(stats, 1.0 - tail));
    };
    intervals.accuracy = interval_of(acc_stats);
    intervals.mean_kappa = interval_of(kappa_stats);
    intervals.rmse = interval_of(rmse_stats);
    summary.bootstrap = intervals;
  }

  return summary;
}

namespace {

void put_optional(nlohmann::json& obj, const char* key, const std::optional<double>& v) {
  if (v.has_value()) obj[key] = *v;
}

void put_interval(nlohmann::json& obj, const char* key,
                  const std::optional<std::pair<double, double>>& v) {
  if (v.has_value()) obj[key] = {v->first, v->second};
}

}  // namespace

nlohmann::json metrics_to_json(const MetricsSummary& summary) {
  nlohmann::json pooled;
  pooled["n_pairs"] = summary.pooled.n_pairs;
  put_optional(pooled, "accuracy", summary.pooled.accuracy);
  put_optional(pooled, "precision", summary.pooled.precision);
  put_optional(pooled, "recall", summary.pooled.recall);
  put_optional(pooled, "f1", summary.pooled.f1);
  put_optional(pooled, "mean_kappa", summary.pooled.mean_kappa);

  nlohmann::json per_criterion = nlohmann::json::array();
  for (const CriterionMetrics& cm : summary.per_criterion) {
    nlohmann::json jc;
    jc["criterion_id"] = cm.criterion_id;
    jc["scale_type"] = to_string(cm.scale_type);
    jc["n_pairs"] = cm.n_pairs;
    put_optional(jc, "accuracy", cm.accuracy);
    put_optional(jc, "precision", cm.precision);
    put_optional(jc, "recall", cm.recall);
    put_optional(jc, "f1", cm.f1);
    put_optional(jc, "kappa", cm.kappa);
    put_optional(jc, "adjacent_accuracy", cm.adjacent_accuracy);
    put_optional(jc, "emd", cm.emd);
    per_criterion.push_back(std::move(jc));
  }

  nlohmann::json scores;
  scores["n_items"] = summary.scores.n_items;
  put_optional(scores, "rmse", summary.scores.rmse);
  put_optional(scores, "mae", summary.scores.mae);
  put_optional(scores, "spearman", summary.scores.spearman);
  put_optional(scores, "kendall", summary.scores.kendall);
  put_optional(scores, "pearson", summary.scores.pearson);
  put_optional(scores, "icc_2_1", summary.scores.icc_2_1);
  put_optional(scores, "mean_bias", summary.scores.mean_bias);
  if (summary.scores.mean_bias.has_value()) {
    scores["bias_significant"] = summary.scores.bias_significant;
  }

  nlohmann::json doc;
  doc["n_items"] = summary.n_items;
  doc["n_criteria"] = summary.n_criteria;
  doc["criterion_level"] = {{"pooled", std::move(pooled)},
                            {"per_criterion", std::move(per_criterion)}};
  doc["score_level"] = std::move(scores);
  if (summary.mean_agreement.has_value()) {
    doc["mean_agreement"] = *summary.mean_agreement;
  }
  if (summary.bootstrap.has_value()) {
    nlohmann::json b;
    b["n_resamples"] = summary.bootstrap->n_resamples;
    b["level"] = summary.bootstrap->level;
    put_interval(b, "accuracy", summary.bootstrap->accuracy);
    put_interval(b, "mean_kappa", summary.bootstrap->mean_kappa);
    put_interval(b, "rmse", summary.bootstrap->rmse);
    doc["bootstrap"] = std::move(b);
  }
  if (!summary.per_judge.empty()) {
    nlohmann::json judges;
    for (const JudgeBreakdown& breakdown : summary.per_judge) {
      nlohmann::json jj;
      jj["n_pairs"] = breakdown.n_pairs;
      put_optional(jj, "accuracy", breakdown.accuracy);
      put_optional(jj, "mean_kappa", breakdown.mean_kappa);
      judges[breakdown.judge_name] = std::move(jj);
    }
    doc["per_judge"] = std::move(judges);
  }
  return doc;
}

}  // namespace rubriceval
