#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rubriceval/judging.hpp"
#include "rubriceval/rubric.hpp"

namespace rubriceval {

// How a panel of judge verdicts on one criterion becomes one verdict.
//
//   Majority    most common verdict; ties resolve to UNMET (binary) or the
//               tied option that comes first in rubric order (choice)
//   Weighted    like Majority but each judge's vote counts its weight
//   Unanimous   MET only if every judge said MET (binary only)
//   Any         MET if any judge said MET (binary only)
//   Mean        average of option values; the reported verdict is the
//               option nearest that mean (choice only)
//
// CANNOT_ASSESS votes are removed before aggregation; if nothing remains,
// the aggregate is CANNOT_ASSESS.
enum class AggregationStrategy { Majority, Weighted, Unanimous, Any, Mean };

std::string to_string(AggregationStrategy strategy);
AggregationStrategy aggregation_strategy_from_string(const std::string& text);

// One judge in the panel: its transport settings plus a display name and
// the weight its votes carry under Weighted aggregation.
struct JudgeSpec {
  std::string name;
  double vote_weight = 1.0;
  JudgeConfig config;
};

struct WeightedVerdict {
  Verdict verdict;
  double weight = 1.0;
};

// Binary panels only. Throws ConfigError for Mean (a mean of MET/UNMET has
// no principled verdict behind it; use Majority).
Verdict aggregate_binary_votes(std::span<const WeightedVerdict> votes,
                               AggregationStrategy strategy);

struct AggregatedChoice {
  Verdict verdict;
  // Set only under Mean: the weighted average option value, which is what
  // should enter the score (the verdict above is just the nearest label).
  std::optional<double> mean_value;
};

// Multi-option panels. Supports Majority, Weighted, and Mean; Unanimous
// and Any have no multi-option reading and throw ConfigError. Votes whose
// selected option is flagged na count as CANNOT_ASSESS. Under Mean, a
// nearest-value tie between options resolves to the earlier rubric index.
AggregatedChoice aggregate_choice_votes(const Criterion& criterion,
                                        std::span<const WeightedVerdict> votes,
                                        AggregationStrategy strategy);

// Mean over criteria of the fraction of judge pairs in exact verdict
// agreement. Element [i][j] is judge j's verdict on criterion i. Criteria
// with fewer than two votes are left out; nullopt when nothing qualifies
// (e.g. a single-judge panel).
std::optional<double> mean_agreement(
    const std::vector<std::vector<Verdict>>& votes_by_criterion);

}  // namespace rubriceval
