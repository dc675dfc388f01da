#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rubriceval/errors.hpp"

namespace rubriceval {

enum class ScaleType {
  Binary,   // met / not met
  Ordinal,  // graded options on a continuum, values monotone in position
  Nominal,  // unordered named outcomes (e.g. distinct failure modes)
};

std::string to_string(ScaleType type);
ScaleType scale_type_from_string(const std::string& text);

// One selectable outcome of an ordinal or nominal criterion. `value` is the
// credit in [0,1] a submission earns when this option is chosen. Options
// flagged `na` mean "this criterion does not apply here"; choosing one is
// treated like a CANNOT_ASSESS verdict rather than as credit.
struct CriterionOption {
  std::string label;
  double value = 0.0;
  bool na = false;
};

struct Criterion {
  std::string id;
  std::string requirement;  // the checkable statement shown to judges
  double weight = 1.0;      // negative weight marks a penalty criterion
  ScaleType scale_type = ScaleType::Binary;
  std::vector<CriterionOption> options;  // empty for binary

  bool is_penalty() const { return weight < 0.0; }
};

class Rubric {
 public:
  Rubric() = default;
  // Criteria without an id get positional ones (c0, c1, ...) so reports and
  // scripted fixtures can always address them.
  explicit Rubric(std::vector<Criterion> criteria);

  const std::vector<Criterion>& criteria() const { return criteria_; }
  std::size_t size() const { return criteria_.size(); }
  const Criterion& at(std::size_t index) const { return criteria_.at(index); }
  const Criterion* find(const std::string& id) const;

 private:
  std::vector<Criterion> criteria_;
};

// The outcome of judging one criterion. Binary criteria resolve to Met or
// Unmet; multi-option criteria resolve to Choice with the index of the
// selected option in the rubric's (unshuffled) option order. CannotAssess
// stands for "the judge could not evaluate this", whatever the scale.
class Verdict {
 public:
  enum class Kind { Met, Unmet, CannotAssess, Choice };

  Verdict() = default;
  static Verdict met() { return Verdict(Kind::Met, -1); }
  static Verdict unmet() { return Verdict(Kind::Unmet, -1); }
  static Verdict cannot_assess() { return Verdict(Kind::CannotAssess, -1); }
  static Verdict choice(int option_index);

  Kind kind() const { return kind_; }
  bool is_cannot_assess() const { return kind_ == Kind::CannotAssess; }
  // Index of the selected option; throws unless kind() == Choice.
  int choice_index() const;

  // Wire format: "MET", "UNMET", "CANNOT_ASSESS", "CHOICE:<index>".
  std::string to_string() const;
  static Verdict from_string(const std::string& text);

  friend bool operator==(const Verdict& a, const Verdict& b) {
    return a.kind_ == b.kind_ && a.choice_ == b.choice_;
  }
  friend bool operator!=(const Verdict& a, const Verdict& b) { return !(a == b); }

 private:
  Verdict(Kind kind, int choice) : kind_(kind), choice_(choice) {}

  Kind kind_ = Kind::CannotAssess;
  int choice_ = -1;
};

struct JudgeVote {
  std::string judge_name;
  Verdict verdict;
  std::string reason;
};

// Per-criterion slice of an evaluation, after ensemble aggregation.
struct CriterionReport {
  std::string criterion_id;
  Verdict verdict;
  std::string reason;
  std::vector<JudgeVote> votes;
  // Mean-strategy ensembles score a criterion by the average option value,
  // which generally falls between options; when set, this value (not the
  // nearest-option verdict above) is what enters the score.
  std::optional<double> value;
};

struct EnsembleEvaluationReport {
  std::string item_id;
  std::vector<CriterionReport> criteria;
  double score = 0.0;
  // Mean pairwise inter-judge agreement across criteria; absent for a
  // single-judge run, where the notion is vacuous.
  std::optional<double> mean_agreement;
  double total_cost = 0.0;
  std::int64_t total_tokens = 0;
  double duration_seconds = 0.0;
};

struct RubricViolation {
  std::string criterion_id;  // empty for rubric-level problems
  std::string message;
};

// Structural checks: nonempty rubric, unique ids, nonzero weights, at least
// one positive-weight criterion, option lists present exactly when the
// scale needs them, option values inside [0,1], nonempty labels.
std::vector<RubricViolation> validate_rubric(const Rubric& rubric);

// Throws ValidationError listing every violation; no-op on a valid rubric.
void ensure_valid(const Rubric& rubric);

// Sum of the positive weights only. This is the score denominator: penalty
// criteria subtract from the numerator but never enlarge what a perfect
// submission can earn.
double total_positive_weight(const Rubric& rubric);

nlohmann::json rubric_to_json(const Rubric& rubric);
Rubric rubric_from_json(const nlohmann::json& doc);

}  // namespace rubriceval
