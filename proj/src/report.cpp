#include "rubriceval/report.hpp"

#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <sstream>

namespace rubriceval {
namespace {

std::string printf_string(const char* format, ...) {
  char buffer[256];
  va_list args;
  va_start(args, format);
  std::vsnprintf(buffer, sizeof(buffer), format, args);
  va_end(args);
  return buffer;
}

// Right-justify `text` in a `width`-character cell.
std::string cell(const std::string& text, int width) {
  if (static_cast<int>(text.size()) >= width) return text;
  return std::string(width - text.size(), ' ') + text;
}

std::string percent1(double fraction) { return printf_string("%.1f%%", fraction * 100.0); }

}  // namespace

std::string format_cost(double cost) { return printf_string("$%.3f", cost); }

std::string format_token_count(std::int64_t tokens) {
  if (tokens < 1000) return std::to_string(tokens);
  if (tokens < 1000000) {
    return std::to_string(static_cast<std::int64_t>(std::llround(tokens / 1000.0))) + "K";
  }
  return printf_string("%.1fM", static_cast<double>(tokens) / 1e6);
}

std::string correlation_strength(double r) {
  double magnitude = std::fabs(r);
  std::string strength = magnitude < 0.3 ? "weak" : magnitude < 0.7 ? "moderate" : "strong";
  if (r == 0.0) return "none";
  return strength + (r > 0.0 ? " positive" : " negative");
}

std::string render_report(const MetricsSummary& summary, const RunTotals& totals) {
  std::ostringstream out;
  const std::string banner(20, '=');
  out << banner << "\nMETRICS SUMMARY\n" << banner << "\n";
  out << "Items: " << summary.n_items << ", Criteria: " << summary.n_criteria << "\n";

  {
    std::ostringstream block;
    auto line = [&](const char* label, const std::optional<double>& value,
                    const std::string& rendered) {
      if (value) block << printf_string("  %-12s%s\n", label, rendered.c_str());
    };
    const PooledCriterionMetrics& pooled = summary.pooled;
    line("Accuracy:", pooled.accuracy, pooled.accuracy ? percent1(*pooled.accuracy) : "");
    line("Precision:", pooled.precision,
         pooled.precision ? printf_string("%.2f", *pooled.precision) : "");
    line("Recall:", pooled.recall, pooled.recall ? printf_string("%.2f", *pooled.recall) : "");
    line("F1:", pooled.f1, pooled.f1 ? printf_string("%.2f", *pooled.f1) : "");
    line("Mean Kappa:", pooled.mean_kappa,
         pooled.mean_kappa ? printf_string("%.3f", *pooled.mean_kappa) : "");
    if (!block.str().empty()) {
      out << "\nCriterion-Level Metrics:\n" << block.str();
    }
  }

  {
    std::ostringstream block;
    const ScoreLevelMetrics& scores = summary.scores;
    auto plain = [&](const char* label, const std::optional<double>& value,
                     const char* format) {
      if (value) {
        block << printf_string("  %-10s", label) << printf_string(format, *value) << "\n";
      }
    };
    auto correlation = [&](const char* label, const std::optional<double>& value) {
      if (value) {
        block << printf_string("  %-10s%.4f (%s)\n", label, *value,
                               correlation_strength(*value).c_str());
      }
    };
    plain("RMSE:", scores.rmse, "%.4f");
    plain("MAE:", scores.mae, "%.4f");
    correlation("Spearman:", scores.spearman);
    correlation("Kendall:", scores.kendall);
    correlation("Pearson:", scores.pearson);
    plain("ICC(2,1):", scores.icc_2_1, "%.4f");
    if (!block.str().empty()) {
      out << "\nScore-Level Metrics:\n" << block.str();
    }
  }

  if (summary.mean_agreement) {
    out << "\nJudge Agreement:\n"
        << printf_string("  %-16s%.3f\n", "Mean Agreement:", *summary.mean_agreement);
  }

  if (summary.scores.mean_bias) {
    double bias = *summary.scores.mean_bias;
    out << "\nBias Analysis:\n";
    out << printf_string("  %-13s%.4f (%s)\n", "Mean Bias:", bias,
                         bias > 0 ? "positive" : bias < 0 ? "negative" : "none");
    out << printf_string("  %-13s%s\n",
                         "Significant:", summary.scores.bias_significant ? "Yes" : "No");
  }

  if (summary.bootstrap) {
    const BootstrapIntervals& ci = *summary.bootstrap;
    std::ostringstream block;
    if (ci.accuracy) {
      block << printf_string("  %-10s[%s, %s]\n", "Accuracy:",
                             percent1(ci.accuracy->first).c_str(),
                             percent1(ci.accuracy->second).c_str());
    }
    if (ci.mean_kappa) {
      block << printf_string("  %-10s[%.3f, %.3f]\n", "Kappa:", ci.mean_kappa->first,
                             ci.mean_kappa->second);
    }
    if (ci.rmse) {
      block << printf_string("  %-10s[%.4f, %.4f]\n", "RMSE:", ci.rmse->first,
                             ci.rmse->second);
    }
    if (!block.str().empty()) {
      out << printf_string("\nBootstrap CIs (%d%%):\n",
                           static_cast<int>(std::lround(ci.level * 100)))
          << block.str();
    }
  }

  if (!summary.per_criterion.empty()) {
    out << "\nPer-Criterion Breakdown:\n";
    out << printf_string("%-20s", "Criterion") << cell("Acc", 9) << cell("Prec", 9)
        << cell("Rec", 9) << cell("F1", 9) << cell("Kappa", 9) << "\n";
    out << std::string(65, '-') << "\n";
    for (const CriterionMetrics& criterion : summary.per_criterion) {
      std::string name = criterion.criterion_id.substr(0, 20);
      out << printf_string("%-20s", name.c_str());
      out << cell(criterion.accuracy ? percent1(*criterion.accuracy) : "-", 9);
      auto two = [&](const std::optional<double>& value) {
        out << cell(value ? printf_string("%.2f", *value) : "-", 9);
      };
      two(criterion.precision);
      two(criterion.recall);
      two(criterion.f1);
      out << cell(criterion.kappa ? printf_string("%.3f", *criterion.kappa) : "-", 9);
      out << "\n";
    }
  }

  if (summary.per_judge.size() > 1) {
    out << "\nPer-Judge Breakdown:\n";
    out << printf_string("%-20s", "Judge") << cell("Acc", 9) << cell("Kappa", 9) << "\n";
    out << std::string(38, '-') << "\n";
    for (const JudgeBreakdown& judge : summary.per_judge) {
      out << printf_string("%-20s", judge.judge_name.substr(0, 20).c_str());
      out << cell(judge.accuracy ? percent1(*judge.accuracy) : "-", 9);
      out << cell(judge.mean_kappa ? printf_string("%.3f", *judge.mean_kappa) : "-", 9);
      out << "\n";
    }
  }

  out << "\nTotal Cost: " << format_cost(totals.cost) << " (" << totals.items << " items, "
      << format_token_count(totals.tokens) << " tokens)\n";
  return out.str();
}

}  // namespace rubriceval
