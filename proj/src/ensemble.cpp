#include "rubriceval/ensemble.hpp"

#include <cmath>
#include <map>

#include "rubriceval/scoring.hpp"

namespace rubriceval {

std::string to_string(AggregationStrategy strategy) {
  switch (strategy) {
    case AggregationStrategy::Majority:
      return "majority";
    case AggregationStrategy::Weighted:
      return "weighted";
    case AggregationStrategy::Unanimous:
      return "unanimous";
    case AggregationStrategy::Any:
      return "any";
    case AggregationStrategy::Mean:
      return "mean";
  }
  throw Error("unreachable aggregation strategy");
}

AggregationStrategy aggregation_strategy_from_string(const std::string& text) {
  if (text == "majority") return AggregationStrategy::Majority;
  if (text == "weighted") return AggregationStrategy::Weighted;
  if (text == "unanimous") return AggregationStrategy::Unanimous;
  if (text == "any") return AggregationStrategy::Any;
  if (text == "mean") return AggregationStrategy::Mean;
  throw ConfigError("unknown aggregation strategy: \"" + text + "\"");
}

namespace {

std::vector<WeightedVerdict> drop_cannot_assess(std::span<const WeightedVerdict> votes) {
  std::vector<WeightedVerdict> kept;
  kept.reserve(votes.size());
  for (const WeightedVerdict& vote : votes) {
    if (!vote.verdict.is_cannot_assess()) kept.push_back(vote);
  }
  return kept;
}

}  // namespace

Verdict aggregate_binary_votes(std::span<const WeightedVerdict> votes,
                               AggregationStrategy strategy) {
  if (strategy == AggregationStrategy::Mean) {
    throw ConfigError("mean aggregation is undefined for binary criteria");
  }
  if (votes.empty()) {
    throw ConfigError("cannot aggregate an empty vote list");
  }
  const std::vector<WeightedVerdict> kept = drop_cannot_assess(votes);
  if (kept.empty()) return Verdict::cannot_assess();

  double met = 0.0;
  double unmet = 0.0;
  for (const WeightedVerdict& vote : kept) {
    switch (vote.verdict.kind()) {
      case Verdict::Kind::Met:
        met += strategy == AggregationStrategy::Weighted ? vote.weight : 1.0;
        break;
      case Verdict::Kind::Unmet:
        unmet += strategy == AggregationStrategy::Weighted ? vote.weight : 1.0;
        break;
      default:
        throw InvalidVerdictError("binary aggregation got verdict " +
                                  vote.verdict.to_string());
    }
  }

  switch (strategy) {
    case AggregationStrategy::Unanimous:
      return unmet == 0.0 ? Verdict::met() : Verdict::unmet();
    case AggregationStrategy::Any:
      return met > 0.0 ? Verdict::met() : Verdict::unmet();
    case AggregationStrategy::Majority:
    case AggregationStrategy::Weighted:
      // Ties break conservative: an evenly split panel does not certify MET.
      return met > unmet ? Verdict::met() : Verdict::unmet();
    case AggregationStrategy::Mean:
      break;
  }
  throw Error("unreachable aggregation strategy");
}

AggregatedChoice aggregate_choice_votes(const Criterion& criterion,
                                        std::span<const WeightedVerdict> votes,
                                        AggregationStrategy strategy) {
  if (strategy == AggregationStrategy::Unanimous || strategy == AggregationStrategy::Any) {
    throw ConfigError(to_string(strategy) +
                      " aggregation has no multi-option interpretation");
  }
  if (votes.empty()) {
    throw ConfigError("cannot aggregate an empty vote list");
  }
  // Votes that picked an na option carry no assessable signal either.
  std::vector<WeightedVerdict> kept;
  for (const WeightedVerdict& vote : drop_cannot_assess(votes)) {
    if (vote.verdict.kind() != Verdict::Kind::Choice) {
      throw InvalidVerdictError("choice aggregation got verdict " +
                                vote.verdict.to_string());
    }
    if (!verdict_value(criterion, vote.verdict).has_value()) continue;
    kept.push_back(vote);
  }
  if (kept.empty()) return {Verdict::cannot_assess(), std::nullopt};

  if (strategy == AggregationStrategy::Mean) {
    double value_sum = 0.0;
    double weight_sum = 0.0;
    for (const WeightedVerdict& vote : kept) {
      value_sum += *verdict_value(criterion, vote.verdict) * vote.weight;
      weight_sum += vote.weight;
    }
    const double mean = value_sum / weight_sum;
    // Report the option whose value is nearest the mean; strict improvement
    // only, so equidistant options resolve to the earlier rubric index.
    int best = -1;
    double best_distance = 0.0;
    for (std::size_t i = 0; i < criterion.options.size(); ++i) {
      if (criterion.options[i].na) continue;
      const double distance = std::abs(criterion.options[i].value - mean);
      if (best < 0 || distance < best_distance) {
        best = static_cast<int>(i);
        best_distance = distance;
      }
    }
    return {Verdict::choice(best), mean};
  }

  // Majority / Weighted over option indices.
  std::map<int, double> tally;
  for (const WeightedVerdict& vote : kept) {
    tally[vote.verdict.choice_index()] +=
        strategy == AggregationStrategy::Weighted ? vote.weight : 1.0;
  }
  int best = -1;
  double best_count = -1.0;
  for (const auto& [index, count] : tally) {  // map order = rubric order, so
    if (count > best_count) {                 // ties go to the earlier option
      best = index;
      best_count = count;
    }
  }
  return {Verdict::choice(best), std::nullopt};
}

std::optional<double> mean_agreement(
    const std::vector<std::vector<Verdict>>& votes_by_criterion) {
  double total = 0.0;
  std::size_t counted = 0;
  for (const std::vector<Verdict>& votes : votes_by_criterion) {
    if (votes.size() < 2) continue;
    std::size_t agreeing = 0;
    std::size_t pairs = 0;
    for (std::size_t i = 0; i < votes.size(); ++i) {
      for (std::size_t j = i + 1; j < votes.size(); ++j) {
        ++pairs;
        if (votes[i] == votes[j]) ++agreeing;
      }
    }
    total += static_cast<double>(agreeing) / static_cast<double>(pairs);
    ++counted;
  }
  if (counted == 0) return std::nullopt;
  return total / static_cast<double>(counted);
}

}  // namespace rubriceval
