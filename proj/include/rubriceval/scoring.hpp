#pragma once

#include <optional>
#include <span>
#include <string>

#include "rubriceval/rubric.hpp"

namespace rubriceval {

// What to do with a criterion whose verdict is CANNOT_ASSESS (or whose
// selected option is flagged na) when rolling verdicts up into a score.
//
//   Skip     drop the criterion from numerator and denominator, i.e. score
//            only what was assessable
//   Zero     credit 0 but keep the criterion in the denominator
//   Partial  credit a fixed fraction (partial_credit) of the weight
//   Fail     assume the worst: no credit on positive criteria, the full
//            penalty on negative ones
//
// Partial applies the same fraction regardless of weight sign, so an
// unassessable penalty still costs partial_credit * |weight|. That is
// deliberate: the submission gets the benefit of the doubt symmetrically,
// not a free pass on penalties.
enum class CannotAssessStrategy { Skip, Zero, Partial, Fail };

std::string to_string(CannotAssessStrategy strategy);
CannotAssessStrategy cannot_assess_strategy_from_string(const std::string& text);

struct CannotAssessConfig {
  CannotAssessStrategy strategy = CannotAssessStrategy::Skip;
  double partial_credit = 0.5;  // only used by Partial
};

// Fraction of the criterion's weight earned by this verdict, in [0,1].
// Binary: MET -> 1, UNMET -> 0. Choice: the selected option's value.
// Returns nullopt when the verdict carries no assessable value (a
// CANNOT_ASSESS verdict, or a choice whose option is flagged na).
// Throws InvalidVerdictError when the verdict cannot apply to the scale
// (choice on a binary criterion, out-of-range option index, ...).
std::optional<double> verdict_value(const Criterion& criterion, const Verdict& verdict);

struct CannotAssessResolution {
  bool exclude = false;  // Skip: leave the criterion out entirely
  double value = 0.0;    // credit fraction when kept
};

CannotAssessResolution resolve_cannot_assess(const Criterion& criterion,
                                             const CannotAssessConfig& config);

// A resolved criterion outcome as the scorer consumes it. `value_override`
// is for mean-aggregated ensembles, where the effective credit is an
// average over judges and need not equal any single option's value.
struct CriterionOutcome {
  Verdict verdict;
  std::optional<double> value_override;
};

// Weighted rubric score:
//
//     clamp( sum_i v_i * w_i / sum_{w_i > 0} w_i , 0, 1 )
//
// with v_i the credit fraction for criterion i. Verdicts are positional
// (verdicts[i] applies to rubric.at(i)). Penalties participate in the
// numerator only, so a submission that trips every penalty clamps at 0
// rather than going negative, and one that merely avoids them cannot
// exceed 1. Throws UndefinedScoreError when, after Skip exclusions, no
// positive weight remains in the denominator.
double aggregate_score(const Rubric& rubric, std::span<const Verdict> verdicts,
                       const CannotAssessConfig& config = {});

double aggregate_score(const Rubric& rubric, std::span<const CriterionOutcome> outcomes,
                       const CannotAssessConfig& config = {});

}  // namespace rubriceval
