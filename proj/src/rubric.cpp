#include "rubriceval/rubric.hpp"

#include <cctype>
#include <cstdlib>
#include <set>
#include <sstream>

namespace rubriceval {

std::string to_string(ScaleType type) {
  switch (type) {
    case ScaleType::Binary:
      return "binary";
    case ScaleType::Ordinal:
      return "ordinal";
    case ScaleType::Nominal:
      return "nominal";
  }
  throw Error("unreachable scale type");
}

ScaleType scale_type_from_string(const std::string& text) {
  if (text == "binary") return ScaleType::Binary;
  if (text == "ordinal") return ScaleType::Ordinal;
  if (text == "nominal") return ScaleType::Nominal;
  throw ValidationError("unknown scale_type: \"" + text + "\"");
}

Rubric::Rubric(std::vector<Criterion> criteria) : criteria_(std::move(criteria)) {
  for (std::size_t i = 0; i < criteria_.size(); ++i) {
    if (criteria_[i].id.empty()) {
      criteria_[i].id = "c" + std::to_string(i);
    }
  }
}

const Criterion* Rubric::find(const std::string& id) const {
  for (const Criterion& c : criteria_) {
    if (c.id == id) return &c;
  }
  return nullptr;
}

Verdict Verdict::choice(int option_index) {
  if (option_index < 0) {
    throw InvalidVerdictError("choice index must be non-negative, got " +
                              std::to_string(option_index));
  }
  return Verdict(Kind::Choice, option_index);
}

int Verdict::choice_index() const {
  if (kind_ != Kind::Choice) {
    throw InvalidVerdictError("verdict " + to_string() + " has no choice index");
  }
  return choice_;
}

std::string Verdict::to_string() const {
  switch (kind_) {
    case Kind::Met:
      return "MET";
    case Kind::Unmet:
      return "UNMET";
    case Kind::CannotAssess:
      return "CANNOT_ASSESS";
    case Kind::Choice:
      return "CHOICE:" + std::to_string(choice_);
  }
  throw Error("unreachable verdict kind");
}

Verdict Verdict::from_string(const std::string& text) {
  if (text == "MET") return met();
  if (text == "UNMET") return unmet();
  if (text == "CANNOT_ASSESS") return cannot_assess();
  if (text.rfind("CHOICE:", 0) == 0) {
    const std::string digits = text.substr(7);
    if (!digits.empty() &&
        digits.find_first_not_of("0123456789") == std::string::npos) {
      return choice(std::atoi(digits.c_str()));
    }
  }
  throw InvalidVerdictError("cannot parse verdict from \"" + text + "\"");
}

std::vector<RubricViolation> validate_rubric(const Rubric& rubric) {
  std::vector<RubricViolation> out;
  if (rubric.size() == 0) {
    out.push_back({"", "rubric has no criteria"});
    return out;
  }

  std::set<std::string> seen_ids;
  bool any_positive = false;
  for (const Criterion& c : rubric.criteria()) {
    if (!seen_ids.insert(c.id).second) {
      out.push_back({c.id, "duplicate criterion id"});
    }
    if (c.requirement.empty()) {
      out.push_back({c.id, "requirement text is empty"});
    }
    if (c.weight == 0.0) {
      out.push_back({c.id, "weight must be nonzero"});
    }
    if (c.weight > 0.0) any_positive = true;

    if (c.scale_type == ScaleType::Binary) {
      if (!c.options.empty()) {
        out.push_back({c.id, "binary criterion must not define options"});
      }
    } else {
      if (c.options.size() < 2) {
        out.push_back({c.id, "multi-option criterion needs at least 2 options"});
      }
      bool any_assessable = false;
      for (const CriterionOption& opt : c.options) {
        if (!opt.na) any_assessable = true;
      }
      if (!any_assessable && !c.options.empty()) {
        out.push_back({c.id, "every option is flagged na; criterion can never be assessed"});
      }
      std::set<std::string> labels;
      for (const CriterionOption& opt : c.options) {
        if (opt.label.empty()) {
          out.push_back({c.id, "option label is empty"});
        } else if (!labels.insert(opt.label).second) {
          out.push_back({c.id, "duplicate option label \"" + opt.label + "\""});
        }
        if (opt.value < 0.0 || opt.value > 1.0) {
          out.push_back({c.id, "option \"" + opt.label + "\" value " +
                                   std::to_string(opt.value) +
                                   " outside [0,1]"});
        }
      }
    }
  }
  if (!any_positive) {
    out.push_back({"", "rubric needs at least one positive-weight criterion"});
  }
  return out;
}

void ensure_valid(const Rubric& rubric) {
  const std::vector<RubricViolation> violations = validate_rubric(rubric);
  if (violations.empty()) return;
  std::ostringstream msg;
  msg << "invalid rubric:";
  for (const RubricViolation& v : violations) {
    msg << "\n  ";
    if (!v.criterion_id.empty()) msg << "[" << v.criterion_id << "] ";
    msg << v.message;
  }
  throw ValidationError(msg.str());
}

double total_positive_weight(const Rubric& rubric) {
  double total = 0.0;
  for (const Criterion& c : rubric.criteria()) {
    if (c.weight > 0.0) total += c.weight;
  }
  return total;
}

nlohmann::json rubric_to_json(const Rubric& rubric) {
  nlohmann::json criteria = nlohmann::json::array();
  for (const Criterion& c : rubric.criteria()) {
    nlohmann::json jc = {
        {"id", c.id},
        {"requirement", c.requirement},
        {"weight", c.weight},
        {"scale_type", to_string(c.scale_type)},
    };
    if (!c.options.empty()) {
      nlohmann::json opts = nlohmann::json::array();
      for (const CriterionOption& opt : c.options) {
        nlohmann::json jo = {{"label", opt.label}, {"value", opt.value}};
        if (opt.na) jo["na"] = true;
        opts.push_back(std::move(jo));
      }
      jc["options"] = std::move(opts);
    }
    criteria.push_back(std::move(jc));
  }
  return nlohmann::json{{"criteria", std::move(criteria)}};
}

Rubric rubric_from_json(const nlohmann::json& doc) {
  if (!doc.is_object() || !doc.contains("criteria") || !doc["criteria"].is_array()) {
    throw ValidationError("rubric json must be an object with a \"criteria\" array");
  }
  std::vector<Criterion> criteria;
  for (const nlohmann::json& jc : doc["criteria"]) {
    if (!jc.is_object()) {
      throw ValidationError("rubric criterion must be a json object");
    }
    Criterion c;
    c.id = jc.value("id", "");
    c.requirement = jc.value("requirement", "");
    c.weight = jc.value("weight", 1.0);
    c.scale_type = scale_type_from_string(jc.value("scale_type", "binary"));
    if (jc.contains("options")) {
      for (const nlohmann::json& jo : jc["options"]) {
        CriterionOption opt;
        opt.label = jo.value("label", "");
        opt.value = jo.value("value", 0.0);
        opt.na = jo.value("na", false);
        c.options.push_back(std::move(opt));
      }
    }
    criteria.push_back(std::move(c));
  }
  return Rubric(std::move(criteria));
}

}  // namespace rubriceval
