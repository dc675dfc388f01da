#pragma once

#include <cstdint>
#include <string>

#include "rubriceval/metrics.hpp"
#include "rubriceval/runner.hpp"

namespace rubriceval {

// "$0.090": dollars with three decimals, enough for per-run judge spend.
std::string format_cost(double cost);

// Compact token counts: 845 -> "845", 124000 -> "124K", 2500000 -> "2.5M".
std::string format_token_count(std::int64_t tokens);

// Qualitative read of a correlation coefficient, e.g. "moderate positive":
// |r| < 0.3 weak, < 0.7 moderate, else strong.
std::string correlation_strength(double r);

// Plain-text metrics report. Layout is pinned by golden-file tests:
// a METRICS SUMMARY banner, criterion-level block, score-level block,
// agreement and bias blocks, bootstrap CIs, a per-criterion (and, for
// ensembles, per-judge) table, and the total-cost line. Undefined
// statistics render as absent lines or "-" cells, never as 0.
std::string render_report(const MetricsSummary& summary, const RunTotals& totals);

}  // namespace rubriceval
