#include <doctest.h>

#include "rubriceval/rubric.hpp"

using namespace rubriceval;

namespace {

Criterion binary(const std::string& id, double weight) {
  Criterion c;
  c.id = id;
  c.requirement = "requirement for " + id;
  c.weight = weight;
  c.scale_type = ScaleType::Binary;
  return c;
}

Criterion ordinal(const std::string& id, double weight,
                  std::vector<CriterionOption> options) {
  Criterion c;
  c.id = id;
  c.requirement = "requirement for " + id;
  c.weight = weight;
  c.scale_type = ScaleType::Ordinal;
  c.options = std::move(options);
  return c;
}

}  // namespace

TEST_CASE("verdict wire format round trips") {
  CHECK(Verdict::met().to_string() == "MET");
  CHECK(Verdict::unmet().to_string() == "UNMET");
  CHECK(Verdict::cannot_assess().to_string() == "CANNOT_ASSESS");
  CHECK(Verdict::choice(3).to_string() == "CHOICE:3");

  CHECK(Verdict::from_string("MET") == Verdict::met());
  CHECK(Verdict::from_string("UNMET") == Verdict::unmet());
  CHECK(Verdict::from_string("CANNOT_ASSESS") == Verdict::cannot_assess());
  CHECK(Verdict::from_string("CHOICE:2") == Verdict::choice(2));
  CHECK(Verdict::from_string("CHOICE:2").choice_index() == 2);

  CHECK_THROWS_AS(Verdict::from_string("maybe"), InvalidVerdictError);
  CHECK_THROWS_AS(Verdict::from_string("CHOICE:x"), InvalidVerdictError);
  CHECK_THROWS_AS(Verdict::from_string("CHOICE:-1"), InvalidVerdictError);
  CHECK_THROWS_AS(Verdict::met().choice_index(), InvalidVerdictError);
}

TEST_CASE("criteria without ids get positional ones") {
  Criterion a = binary("", 1.0);
  Criterion b = binary("named", 1.0);
  Criterion c = binary("", 1.0);
  Rubric rubric({a, b, c});
  CHECK(rubric.at(0).id == "c0");
  CHECK(rubric.at(1).id == "named");
  CHECK(rubric.at(2).id == "c2");
  CHECK(rubric.find("named") != nullptr);
  CHECK(rubric.find("absent") == nullptr);
}

TEST_CASE("validate_rubric accepts a well formed rubric") {
  Rubric rubric({binary("a", 30.0), binary("b", -15.0),
                 ordinal("c", 10.0,
                         {{"bad", 0.0, false}, {"ok", 0.5, false}, {"good", 1.0, false}})});
  CHECK(validate_rubric(rubric).empty());
  CHECK_NOTHROW(ensure_valid(rubric));
}

TEST_CASE("validate_rubric flags structural problems") {
  SUBCASE("empty rubric") { CHECK_FALSE(validate_rubric(Rubric{}).empty()); }
  SUBCASE("duplicate ids") {
    CHECK_FALSE(validate_rubric(Rubric({binary("x", 1.0), binary("x", 2.0)})).empty());
  }
  SUBCASE("zero weight") {
    CHECK_FALSE(validate_rubric(Rubric({binary("x", 0.0), binary("y", 1.0)})).empty());
  }
  SUBCASE("no positive weight") {
    CHECK_FALSE(validate_rubric(Rubric({binary("x", -1.0)})).empty());
  }
  SUBCASE("binary criterion with options") {
    Criterion c = binary("x", 1.0);
    c.options = {{"yes", 1.0, false}};
    CHECK_FALSE(validate_rubric(Rubric({c})).empty());
  }
  SUBCASE("multi-option criterion with too few options") {
    CHECK_FALSE(validate_rubric(Rubric({ordinal("x", 1.0, {{"only", 1.0, false}})})).empty());
  }
  SUBCASE("empty option label") {
    CHECK_FALSE(validate_rubric(
                    Rubric({ordinal("x", 1.0, {{"", 0.0, false}, {"b", 1.0, false}})}))
                    .empty());
  }
  SUBCASE("duplicate option labels") {
    CHECK_FALSE(validate_rubric(
                    Rubric({ordinal("x", 1.0, {{"a", 0.0, false}, {"a", 1.0, false}})}))
                    .empty());
  }
  SUBCASE("option value out of range") {
    CHECK_FALSE(validate_rubric(
                    Rubric({ordinal("x", 1.0, {{"a", -0.1, false}, {"b", 1.0, false}})}))
                    .empty());
    CHECK_FALSE(validate_rubric(
                    Rubric({ordinal("x", 1.0, {{"a", 0.0, false}, {"b", 1.1, false}})}))
                    .empty());
  }
  SUBCASE("all options flagged na") {
    CHECK_FALSE(validate_rubric(
                    Rubric({ordinal("x", 1.0, {{"a", 0.0, true}, {"b", 1.0, true}})}))
                    .empty());
  }
  SUBCASE("ensure_valid aggregates messages") {
    Rubric bad({binary("x", 0.0), binary("x", -1.0)});
    CHECK_THROWS_AS(ensure_valid(bad), ValidationError);
  }
}

TEST_CASE("total_positive_weight ignores penalties") {
  Rubric rubric({binary("a", 30.0), binary("b", 30.0), binary("c", 12.0), binary("d", 8.0),
                 binary("e", -15.0)});
  CHECK(total_positive_weight(rubric) == doctest::Approx(80.0));
}

TEST_CASE("rubric json round trip preserves options and na flags") {
  Rubric rubric({binary("causes", 30.0),
                 ordinal("tone", 10.0,
                         {{"poor", 0.0, false},
                          {"fine", 0.5, false},
                          {"great", 1.0, false},
                          {"not applicable", 0.0, true}})});
  nlohmann::json doc = rubric_to_json(rubric);
  Rubric back = rubric_from_json(doc);
  REQUIRE(back.size() == 2);
  CHECK(back.at(0).id == "causes");
  CHECK(back.at(0).scale_type == ScaleType::Binary);
  CHECK(back.at(1).options.size() == 4);
  CHECK(back.at(1).options[3].na);
  CHECK(back.at(1).options[1].value == doctest::Approx(0.5));
  CHECK(rubric_to_json(back) == doc);
}

TEST_CASE("rubric_from_json rejects malformed documents") {
  CHECK_THROWS_AS(rubric_from_json(nlohmann::json::object()), ValidationError);
  CHECK_THROWS_AS(rubric_from_json(nlohmann::json{{"criteria", 7}}), ValidationError);
}
