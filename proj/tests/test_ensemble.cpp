#include <doctest.h>

#include <vector>

#include "rubriceval/ensemble.hpp"
#include "rubriceval/rng.hpp"

using namespace rubriceval;

namespace {

const Verdict kMet = Verdict::met();
const Verdict kUnmet = Verdict::unmet();
const Verdict kCa = Verdict::cannot_assess();

std::vector<WeightedVerdict> equal(std::initializer_list<Verdict> verdicts) {
  std::vector<WeightedVerdict> out;
  for (const Verdict& v : verdicts) out.push_back({v, 1.0});
  return out;
}

Criterion four_options() {
  Criterion c;
  c.id = "tone";
  c.requirement = "tone";
  c.scale_type = ScaleType::Ordinal;
  c.options = {{"bad", 0.0, false}, {"weak", 0.33, false}, {"good", 0.67, false},
               {"great", 1.0, false}};
  return c;
}

}  // namespace

TEST_CASE("binary majority with UNMET tie break") {
  CHECK(aggregate_binary_votes(equal({kMet, kMet, kUnmet}), AggregationStrategy::Majority) ==
        kMet);
  CHECK(aggregate_binary_votes(equal({kMet, kUnmet}), AggregationStrategy::Majority) ==
        kUnmet);
  CHECK(aggregate_binary_votes(equal({kUnmet, kUnmet, kMet}),
                               AggregationStrategy::Majority) == kUnmet);
}

TEST_CASE("cannot-assess votes are excluded before aggregation") {
  CHECK(aggregate_binary_votes(equal({kCa, kMet}), AggregationStrategy::Majority) == kMet);
  CHECK(aggregate_binary_votes(equal({kCa, kCa, kUnmet}), AggregationStrategy::Majority) ==
        kUnmet);
  CHECK(aggregate_binary_votes(equal({kCa, kCa}), AggregationStrategy::Majority) == kCa);
  CHECK(aggregate_binary_votes(equal({kCa}), AggregationStrategy::Unanimous) == kCa);
}

TEST_CASE("weighted votes use vote weights, not head counts") {
  std::vector<WeightedVerdict> votes{{kMet, 1.0}, {kUnmet, 1.2}};
  CHECK(aggregate_binary_votes(votes, AggregationStrategy::Weighted) == kUnmet);
  std::vector<WeightedVerdict> flipped{{kMet, 2.0}, {kUnmet, 1.2}};
  CHECK(aggregate_binary_votes(flipped, AggregationStrategy::Weighted) == kMet);
  // Exact weight tie goes to UNMET like any other tie.
  std::vector<WeightedVerdict> tie{{kMet, 1.5}, {kUnmet, 1.5}};
  CHECK(aggregate_binary_votes(tie, AggregationStrategy::Weighted) == kUnmet);
}

TEST_CASE("unanimous and any behave as quantifiers") {
  CHECK(aggregate_binary_votes(equal({kMet, kMet, kMet}), AggregationStrategy::Unanimous) ==
        kMet);
  CHECK(aggregate_binary_votes(equal({kMet, kMet, kUnmet}),
                               AggregationStrategy::Unanimous) == kUnmet);
  CHECK(aggregate_binary_votes(equal({kUnmet, kUnmet, kMet}), AggregationStrategy::Any) ==
        kMet);
  CHECK(aggregate_binary_votes(equal({kUnmet, kUnmet}), AggregationStrategy::Any) ==
        kUnmet);
}

TEST_CASE("strategy and scale mismatches are configuration errors") {
  CHECK_THROWS_AS(aggregate_binary_votes(equal({kMet}), AggregationStrategy::Mean),
                  ConfigError);
  Criterion c = four_options();
  CHECK_THROWS_AS(aggregate_choice_votes(c, equal({Verdict::choice(0)}),
                                         AggregationStrategy::Unanimous),
                  ConfigError);
  CHECK_THROWS_AS(
      aggregate_choice_votes(c, equal({Verdict::choice(0)}), AggregationStrategy::Any),
      ConfigError);
  CHECK_THROWS_AS(aggregate_binary_votes({}, AggregationStrategy::Majority), ConfigError);
  CHECK_THROWS_AS(aggregate_choice_votes(c, {}, AggregationStrategy::Majority),
                  ConfigError);
}

TEST_CASE("choice majority is modal with low-index tie break") {
  Criterion c = four_options();
  auto votes = equal({Verdict::choice(0), Verdict::choice(0), Verdict::choice(3)});
  AggregatedChoice modal = aggregate_choice_votes(c, votes, AggregationStrategy::Majority);
  CHECK(modal.verdict == Verdict::choice(0));
  CHECK_FALSE(modal.mean_value.has_value());

  auto tie = equal({Verdict::choice(2), Verdict::choice(1)});
  CHECK(aggregate_choice_votes(c, tie, AggregationStrategy::Majority).verdict ==
        Verdict::choice(1));

  std::vector<WeightedVerdict> weighted{{Verdict::choice(2), 3.0}, {Verdict::choice(1), 1.0},
                                        {Verdict::choice(1), 1.0}};
  CHECK(aggregate_choice_votes(c, weighted, AggregationStrategy::Weighted).verdict ==
        Verdict::choice(2));
}

TEST_CASE("mean strategy scores by weighted mean and reports the nearest option") {
  Criterion c = four_options();

  // Mean of 0.0 and 1.0 is 0.5; both middle options are 0.17 away, so the
  // earlier index wins the tie.
  auto split = equal({Verdict::choice(0), Verdict::choice(3)});
  AggregatedChoice mean = aggregate_choice_votes(c, split, AggregationStrategy::Mean);
  REQUIRE(mean.mean_value.has_value());
  CHECK(*mean.mean_value == doctest::Approx(0.5));
  CHECK(mean.verdict == Verdict::choice(1));

  std::vector<WeightedVerdict> weighted{{Verdict::choice(0), 1.0}, {Verdict::choice(3), 3.0}};
  AggregatedChoice pulled = aggregate_choice_votes(c, weighted, AggregationStrategy::Mean);
  CHECK(*pulled.mean_value == doctest::Approx(0.75));
  CHECK(pulled.verdict == Verdict::choice(2));

  auto ca_mixed = equal({Verdict::choice(3), kCa});
  AggregatedChoice skipped = aggregate_choice_votes(c, ca_mixed, AggregationStrategy::Mean);
  CHECK(*skipped.mean_value == doctest::Approx(1.0));
  CHECK(skipped.verdict == Verdict::choice(3));

  auto all_ca = equal({kCa, kCa});
  AggregatedChoice none = aggregate_choice_votes(c, all_ca, AggregationStrategy::Mean);
  CHECK(none.verdict == kCa);
  CHECK_FALSE(none.mean_value.has_value());
}

TEST_CASE("na options vote as cannot-assess") {
  Criterion c = four_options();
  c.options.push_back({"not applicable", 0.0, true});
  auto votes = equal({Verdict::choice(4), Verdict::choice(2)});
  AggregatedChoice result = aggregate_choice_votes(c, votes, AggregationStrategy::Majority);
  CHECK(result.verdict == Verdict::choice(2));
  CHECK(aggregate_choice_votes(c, equal({Verdict::choice(4)}), AggregationStrategy::Majority)
            .verdict == kCa);
}

TEST_CASE("three-judge binary panels match an exhaustive truth table") {
  for (int pattern = 0; pattern < 8; ++pattern) {
    int met_count = 0;
    std::vector<WeightedVerdict> votes;
    for (int j = 0; j < 3; ++j) {
      bool met = (pattern >> j) & 1;
      met_count += met ? 1 : 0;
      votes.push_back({met ? kMet : kUnmet, 1.0});
    }
    CAPTURE(pattern);
    CHECK(aggregate_binary_votes(votes, AggregationStrategy::Majority) ==
          (met_count >= 2 ? kMet : kUnmet));
    CHECK(aggregate_binary_votes(votes, AggregationStrategy::Unanimous) ==
          (met_count == 3 ? kMet : kUnmet));
    CHECK(aggregate_binary_votes(votes, AggregationStrategy::Any) ==
          (met_count >= 1 ? kMet : kUnmet));
    CHECK(aggregate_binary_votes(votes, AggregationStrategy::Weighted) ==
          (met_count >= 2 ? kMet : kUnmet));
  }
}

TEST_CASE("unanimous implies majority implies any on random panels") {
  SplitMix64 rng(31337);
  for (int trial = 0; trial < 10000; ++trial) {
    std::vector<WeightedVerdict> votes;
    auto n = 1 + rng.below(7);
    for (std::uint64_t j = 0; j < n; ++j) {
      votes.push_back({rng.below(2) ? kMet : kUnmet, 1.0});
    }
    bool unanimous =
        aggregate_binary_votes(votes, AggregationStrategy::Unanimous) == kMet;
    bool majority = aggregate_binary_votes(votes, AggregationStrategy::Majority) == kMet;
    bool any = aggregate_binary_votes(votes, AggregationStrategy::Any) == kMet;
    if (unanimous) CHECK(majority);
    if (majority) CHECK(any);
  }
}

TEST_CASE("mean_agreement averages pairwise exact agreement over criteria") {
  // Criterion 0: both judges agree; criterion 1: they split.
  std::vector<std::vector<Verdict>> votes{{kMet, kMet}, {kMet, kUnmet}};
  auto agreement = mean_agreement(votes);
  REQUIRE(agreement.has_value());
  CHECK(*agreement == doctest::Approx(0.5));

  // Three judges, one dissenter: one agreeing pair of three.
  std::vector<std::vector<Verdict>> trio{{kMet, kMet, kUnmet}};
  CHECK(*mean_agreement(trio) == doctest::Approx(1.0 / 3.0));

  std::vector<std::vector<Verdict>> single{{kMet}, {kUnmet}};
  CHECK_FALSE(mean_agreement(single).has_value());

  // Criteria with a single vote are excluded, not counted as agreement.
  std::vector<std::vector<Verdict>> mixed{{kMet}, {kMet, kMet}};
  CHECK(*mean_agreement(mixed) == doctest::Approx(1.0));

  CHECK_FALSE(mean_agreement({}).has_value());
}

TEST_CASE("aggregation strategy names round trip") {
  for (AggregationStrategy strategy :
       {AggregationStrategy::Majority, AggregationStrategy::Weighted,
        AggregationStrategy::Unanimous, AggregationStrategy::Any,
        AggregationStrategy::Mean}) {
    CHECK(aggregation_strategy_from_string(to_string(strategy)) == strategy);
  }
  CHECK_THROWS_AS(aggregation_strategy_from_string("plurality"), ConfigError);
}
