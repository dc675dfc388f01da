#include "rubriceval/scoring.hpp"

#include <algorithm>
#include <vector>

namespace rubriceval {

std::string to_string(CannotAssessStrategy strategy) {
  switch (strategy) {
    case CannotAssessStrategy::Skip:
      return "skip";
    case CannotAssessStrategy::Zero:
      return "zero";
    case CannotAssessStrategy::Partial:
      return "partial";
    case CannotAssessStrategy::Fail:
      return "fail";
  }
  throw Error("unreachable cannot-assess strategy");
}

CannotAssessStrategy cannot_assess_strategy_from_string(const std::string& text) {
  if (text == "skip") return CannotAssessStrategy::Skip;
  if (text == "zero") return CannotAssessStrategy::Zero;
  if (text == "partial") return CannotAssessStrategy::Partial;
  if (text == "fail") return CannotAssessStrategy::Fail;
  throw ConfigError("unknown cannot-assess strategy: \"" + text + "\"");
}

std::optional<double> verdict_value(const Criterion& criterion, const Verdict& verdict) {
  switch (verdict.kind()) {
    case Verdict::Kind::CannotAssess:
      return std::nullopt;
    case Verdict::Kind::Met:
    case Verdict::Kind::Unmet:
      if (criterion.scale_type != ScaleType::Binary) {
        throw InvalidVerdictError("criterion \"" + criterion.id +
                                  "\" is not binary but got verdict " +
                                  verdict.to_string());
      }
      return verdict.kind() == Verdict::Kind::Met ? 1.0 : 0.0;
    case Verdict::Kind::Choice: {
      if (criterion.scale_type == ScaleType::Binary) {
        throw InvalidVerdictError("criterion \"" + criterion.id +
                                  "\" is binary but got verdict " +
                                  verdict.to_string());
      }
      const int index = verdict.choice_index();
      if (index >= static_cast<int>(criterion.options.size())) {
        throw InvalidVerdictError(
            "criterion \"" + criterion.id + "\" has " +
            std::to_string(criterion.options.size()) + " options but got " +
            verdict.to_string());
      }
      const CriterionOption& opt = criterion.options[static_cast<std::size_t>(index)];
      if (opt.na) return std::nullopt;
      return opt.value;
    }
  }
  throw Error("unreachable verdict kind");
}

CannotAssessResolution resolve_cannot_assess(const Criterion& criterion,
                                             const CannotAssessConfig& config) {
  switch (config.strategy) {
    case CannotAssessStrategy::Skip:
      return {true, 0.0};
    case CannotAssessStrategy::Zero:
      return {false, 0.0};
    case CannotAssessStrategy::Partial:
      return {false, config.partial_credit};
    case CannotAssessStrategy::Fail:
      // Worst case depends on polarity: a positive criterion fails by
      // earning nothing, a penalty fails by applying in full.
      return {false, criterion.is_penalty() ? 1.0 : 0.0};
  }
  throw Error("unreachable cannot-assess strategy");
}

double aggregate_score(const Rubric& rubric, std::span<const CriterionOutcome> outcomes,
                       const CannotAssessConfig& config) {
  if (outcomes.size() != rubric.size()) {
    throw ConfigError("got " + std::to_string(outcomes.size()) + " outcomes for " +
                      std::to_string(rubric.size()) + " criteria");
  }
  double numerator = 0.0;
  double denominator = 0.0;
  for (std::size_t i = 0; i < rubric.size(); ++i) {
    const Criterion& criterion = rubric.at(i);
    std::optional<double> value = outcomes[i].value_override;
    if (!value.has_value()) {
      value = verdict_value(criterion, outcomes[i].verdict);
    }
    if (!value.has_value()) {
      const CannotAssessResolution resolution = resolve_cannot_assess(criterion, config);
      if (resolution.exclude) continue;
      value = resolution.value;
    }
    numerator += *value * criterion.weight;
    if (criterion.weight > 0.0) denominator += criterion.weight;
  }
  if (denominator <= 0.0) {
    throw UndefinedScoreError(
        "score undefined: no positive-weight criterion was assessable");
  }
  return std::clamp(numerator / denominator, 0.0, 1.0);
}

double aggregate_score(const Rubric& rubric, std::span<const Verdict> verdicts,
                       const CannotAssessConfig& config) {
  std::vector<CriterionOutcome> outcomes;
  outcomes.reserve(verdicts.size());
  for (const Verdict& v : verdicts) outcomes.push_back({v, std::nullopt});
  return aggregate_score(rubric, outcomes, config);
}

}  // namespace rubriceval
