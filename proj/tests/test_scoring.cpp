#include <doctest.h>

#include <vector>

#include "rubriceval/rng.hpp"
#include "rubriceval/scoring.hpp"

using namespace rubriceval;

namespace {

Rubric essay_rubric() {
  auto bin = [](const std::string& id, double weight) {
    Criterion c;
    c.id = id;
    c.requirement = id;
    c.weight = weight;
    return c;
  };
  return Rubric({bin("causes", 30.0), bin("effects", 30.0), bin("structure", 12.0),
                 bin("britain", 8.0), bin("errors", -15.0)});
}

Rubric two_equal() {
  Criterion a;
  a.id = "a";
  a.requirement = "a";
  Criterion b;
  b.id = "b";
  b.requirement = "b";
  return Rubric({a, b});
}

const Verdict kMet = Verdict::met();
const Verdict kUnmet = Verdict::unmet();
const Verdict kCa = Verdict::cannot_assess();

}  // namespace

// Hand-computed expectations; comparisons are exact (==), not approximate.
TEST_CASE("weighted scoring matches hand calculations exactly") {
  Rubric rubric = essay_rubric();

  // (30+30+12+8-15)/80
  CHECK(aggregate_score(rubric, std::vector<Verdict>{kMet, kMet, kMet, kMet, kMet}) ==
        0.8125);
  // Penalty avoided: full credit.
  CHECK(aggregate_score(rubric, std::vector<Verdict>{kMet, kMet, kMet, kMet, kUnmet}) ==
        1.0);
  // Nothing earned and the penalty trips: clamps at zero, not -15/80.
  CHECK(aggregate_score(rubric,
                        std::vector<Verdict>{kUnmet, kUnmet, kUnmet, kUnmet, kMet}) == 0.0);
  CHECK(aggregate_score(rubric,
                        std::vector<Verdict>{kMet, kUnmet, kUnmet, kUnmet, kUnmet}) ==
        0.375);
}

TEST_CASE("cannot-assess strategies on a two-criterion rubric") {
  Rubric rubric = two_equal();
  std::vector<Verdict> verdicts{kMet, kCa};

  CannotAssessConfig config;
  config.strategy = CannotAssessStrategy::Skip;
  CHECK(aggregate_score(rubric, verdicts, config) == 1.0);

  config.strategy = CannotAssessStrategy::Zero;
  CHECK(aggregate_score(rubric, verdicts, config) == 0.5);

  config.strategy = CannotAssessStrategy::Partial;
  config.partial_credit = 0.5;
  CHECK(aggregate_score(rubric, verdicts, config) == 0.75);
  config.partial_credit = 0.25;
  CHECK(aggregate_score(rubric, verdicts, config) == 0.625);

  config.strategy = CannotAssessStrategy::Fail;
  CHECK(aggregate_score(rubric, verdicts, config) == 0.5);
}

TEST_CASE("cannot-assess on a penalty criterion") {
  Criterion pos;
  pos.id = "p";
  pos.requirement = "p";
  Criterion neg;
  neg.id = "n";
  neg.requirement = "n";
  neg.weight = -1.0;
  Rubric rubric({pos, neg});
  std::vector<Verdict> verdicts{kMet, kCa};

  CannotAssessConfig config;
  config.strategy = CannotAssessStrategy::Skip;
  CHECK(aggregate_score(rubric, verdicts, config) == 1.0);

  // Zero credit on a penalty means no deduction.
  config.strategy = CannotAssessStrategy::Zero;
  CHECK(aggregate_score(rubric, verdicts, config) == 1.0);

  // Partial charges the same fraction of the penalty.
  config.strategy = CannotAssessStrategy::Partial;
  CHECK(aggregate_score(rubric, verdicts, config) == 0.5);

  // Fail assumes the penalty fully applies.
  config.strategy = CannotAssessStrategy::Fail;
  CHECK(aggregate_score(rubric, verdicts, config) == 0.0);
}

TEST_CASE("verdict_value resolves choices through option values") {
  Criterion choice;
  choice.id = "tone";
  choice.requirement = "tone";
  choice.scale_type = ScaleType::Ordinal;
  choice.options = {{"bad", 0.0, false}, {"weak", 0.33, false}, {"good", 0.67, false},
                    {"great", 1.0, false}, {"n/a", 0.0, true}};

  CHECK(verdict_value(choice, Verdict::choice(2)) == 0.67);
  CHECK_FALSE(verdict_value(choice, Verdict::choice(4)).has_value());  // na option
  CHECK_FALSE(verdict_value(choice, kCa).has_value());
  CHECK_THROWS_AS(verdict_value(choice, Verdict::choice(5)), InvalidVerdictError);
  CHECK_THROWS_AS(verdict_value(choice, kMet), InvalidVerdictError);

  Criterion bin;
  bin.id = "b";
  bin.requirement = "b";
  CHECK(verdict_value(bin, kMet) == 1.0);
  CHECK(verdict_value(bin, kUnmet) == 0.0);
  CHECK_THROWS_AS(verdict_value(bin, Verdict::choice(0)), InvalidVerdictError);
}

TEST_CASE("choice criteria score by option value and na acts like cannot-assess") {
  Criterion choice;
  choice.id = "tone";
  choice.requirement = "tone";
  choice.weight = 2.0;
  choice.scale_type = ScaleType::Ordinal;
  choice.options = {{"bad", 0.0, false}, {"mid", 0.5, false}, {"great", 1.0, false},
                    {"n/a", 0.0, true}};
  Criterion bin;
  bin.id = "b";
  bin.requirement = "b";
  Rubric rubric({choice, bin});

  CHECK(aggregate_score(rubric, std::vector<Verdict>{Verdict::choice(1), kMet}) ==
        (0.5 * 2.0 + 1.0) / 3.0);

  CannotAssessConfig skip;
  skip.strategy = CannotAssessStrategy::Skip;
  CHECK(aggregate_score(rubric, std::vector<Verdict>{Verdict::choice(3), kMet}, skip) ==
        1.0);
}

TEST_CASE("value overrides take precedence over the verdict") {
  Rubric rubric = two_equal();
  std::vector<CriterionOutcome> outcomes{{kMet, 0.25}, {kUnmet, std::nullopt}};
  CHECK(aggregate_score(rubric, outcomes) == 0.125);
}

TEST_CASE("scoring failure modes") {
  Rubric rubric = two_equal();
  CannotAssessConfig skip;
  skip.strategy = CannotAssessStrategy::Skip;

  CHECK_THROWS_AS(aggregate_score(rubric, std::vector<Verdict>{kCa, kCa}, skip),
                  UndefinedScoreError);
  CHECK_THROWS_AS(aggregate_score(rubric, std::vector<Verdict>{kMet}), ConfigError);
  CHECK_THROWS_AS(aggregate_score(rubric, std::vector<Verdict>{kMet, kMet, kMet}),
                  ConfigError);
}

TEST_CASE("scores stay in the unit interval for random verdict patterns") {
  SplitMix64 rng(20240817);
  auto bin = [](const std::string& id, double weight) {
    Criterion c;
    c.id = id;
    c.requirement = id;
    c.weight = weight;
    return c;
  };
  const CannotAssessStrategy strategies[] = {
      CannotAssessStrategy::Skip, CannotAssessStrategy::Zero, CannotAssessStrategy::Partial,
      CannotAssessStrategy::Fail};
  for (int trial = 0; trial < 2000; ++trial) {
    std::vector<Criterion> criteria;
    auto n = 1 + rng.below(5);
    bool any_positive = false;
    for (std::uint64_t i = 0; i < n; ++i) {
      double weight = 1.0 + static_cast<double>(rng.below(40));
      if (rng.below(3) == 0 && (any_positive || i + 1 < n)) {
        weight = -weight;
      } else {
        any_positive = true;
      }
      criteria.push_back(bin("c" + std::to_string(i), weight));
    }
    if (!any_positive) criteria.push_back(bin("pad", 5.0));
    Rubric rubric(std::move(criteria));

    std::vector<Verdict> verdicts;
    for (std::size_t i = 0; i < rubric.size(); ++i) {
      switch (rng.below(3)) {
        case 0: verdicts.push_back(kMet); break;
        case 1: verdicts.push_back(kUnmet); break;
        default: verdicts.push_back(kCa); break;
      }
    }
    CannotAssessConfig config;
    config.strategy = strategies[rng.below(4)];
    config.partial_credit = static_cast<double>(rng.below(101)) / 100.0;
    try {
      double score = aggregate_score(rubric, verdicts, config);
      CHECK(score >= 0.0);
      CHECK(score <= 1.0);
    } catch (const UndefinedScoreError&) {
      // Legal outcome: Skip can empty the denominator.
      CHECK(config.strategy == CannotAssessStrategy::Skip);
    }
  }
}
