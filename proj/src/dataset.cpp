#include "rubriceval/dataset.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace rubriceval {

namespace {

std::string item_label(const DatasetItem& item, std::size_t index) {
  return item.item_id.empty() ? "item at index " + std::to_string(index)
                              : "item \"" + item.item_id + "\"";
}

}  // namespace

RubricDataset dataset_from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) {
    throw ValidationError("dataset json must be an object");
  }
  if (!doc.contains("rubric")) {
    throw ValidationError("dataset json is missing \"rubric\"");
  }
  if (!doc.contains("items") || !doc["items"].is_array()) {
    throw ValidationError("dataset json is missing an \"items\" array");
  }

  RubricDataset dataset;
  if (doc.contains("task_prompt")) {
    dataset.task_prompt = doc["task_prompt"].get<std::string>();
  }
  dataset.rubric = rubric_from_json(doc["rubric"]);
  ensure_valid(dataset.rubric);

  std::size_t index = 0;
  for (const nlohmann::json& ji : doc["items"]) {
    if (!ji.is_object() || !ji.contains("submission")) {
      throw ValidationError("items[" + std::to_string(index) +
                            "] must be an object with a \"submission\" field");
    }
    DatasetItem item;
    item.item_id = ji.value("item_id", "item" + std::to_string(index));
    item.submission = ji["submission"].get<std::string>();
    item.description = ji.value("description", "");
    if (ji.contains("ground_truth") && !ji["ground_truth"].is_null()) {
      item.ground_truth = ji["ground_truth"].get<std::vector<std::string>>();
    }
    if (item.ground_truth.has_value()) {
      if (item.ground_truth->size() != dataset.rubric.size()) {
        throw ValidationError(
            item_label(item, index) + " has " +
            std::to_string(item.ground_truth->size()) + " ground-truth labels for " +
            std::to_string(dataset.rubric.size()) + " criteria");
      }
      // Decode every label now so bad files fail at load, not mid-run.
      for (std::size_t c = 0; c < dataset.rubric.size(); ++c) {
        try {
          encode_ground_truth((*item.ground_truth)[c], dataset.rubric.at(c));
        } catch (const ValidationError& e) {
          throw ValidationError(item_label(item, index) + ": " + e.what());
        }
      }
    }
    dataset.items.push_back(std::move(item));
    ++index;
  }
  return dataset;
}

RubricDataset load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw LoadError("cannot open dataset file: " + path.string());
  }
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw LoadError("dataset file " + path.string() + " is not valid json: " + e.what());
  }
  try {
    return dataset_from_json(doc);
  } catch (const ValidationError& e) {
    throw ValidationError("dataset file " + path.string() + ": " + e.what());
  }
}

nlohmann::json dataset_to_json(const RubricDataset& dataset) {
  nlohmann::json items = nlohmann::json::array();
  for (const DatasetItem& item : dataset.items) {
    nlohmann::json ji = {{"item_id", item.item_id}, {"submission", item.submission}};
    if (!item.description.empty()) ji["description"] = item.description;
    if (item.ground_truth.has_value()) ji["ground_truth"] = *item.ground_truth;
    items.push_back(std::move(ji));
  }
  nlohmann::json doc = {{"rubric", rubric_to_json(dataset.rubric)},
                        {"items", std::move(items)}};
  if (dataset.task_prompt.has_value()) doc["task_prompt"] = *dataset.task_prompt;
  return doc;
}

void save_dataset(const RubricDataset& dataset, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) {
    throw LoadError("cannot write dataset file: " + path.string());
  }
  out << dataset_to_json(dataset).dump(2) << '\n';
}

Verdict encode_ground_truth(const std::string& label, const Criterion& criterion) {
  if (criterion.scale_type == ScaleType::Binary) {
    if (label == "MET" || label == "TRUE") return Verdict::met();
    if (label == "UNMET" || label == "FALSE") return Verdict::unmet();
    throw ValidationError("label \"" + label + "\" invalid for binary criterion \"" +
                          criterion.id + "\" (expected MET, UNMET, TRUE, or FALSE)");
  }
  for (std::size_t i = 0; i < criterion.options.size(); ++i) {
    if (criterion.options[i].label == label) {
      return Verdict::choice(static_cast<int>(i));
    }
  }
  std::ostringstream valid;
  for (std::size_t i = 0; i < criterion.options.size(); ++i) {
    if (i > 0) valid << ", ";
    valid << '"' << criterion.options[i].label << '"';
  }
  throw ValidationError("label \"" + label + "\" matches no option of criterion \"" +
                        criterion.id + "\" (valid: " + valid.str() + ")");
}

std::optional<std::vector<Verdict>> ground_truth_verdicts(const Rubric& rubric,
                                                          const DatasetItem& item) {
  if (!item.ground_truth.has_value()) return std::nullopt;
  std::vector<Verdict> verdicts;
  verdicts.reserve(rubric.size());
  for (std::size_t c = 0; c < rubric.size(); ++c) {
    verdicts.push_back(encode_ground_truth((*item.ground_truth)[c], rubric.at(c)));
  }
  return verdicts;
}

DatasetStats dataset_stats(const RubricDataset& dataset) {
  DatasetStats stats;
  stats.n_items = static_cast<int>(dataset.items.size());
  for (const DatasetItem& item : dataset.items) {
    if (item.ground_truth.has_value()) ++stats.n_labeled_items;
  }

  for (std::size_t c = 0; c < dataset.rubric.size(); ++c) {
    const Criterion& criterion = dataset.rubric.at(c);
    CriterionLabelStats cs;
    cs.criterion_id = criterion.id;

    // Count per canonical label; binary TRUE/FALSE fold into MET/UNMET.
    for (const DatasetItem& item : dataset.items) {
      if (!item.ground_truth.has_value()) continue;
      std::string label = (*item.ground_truth)[c];
      if (criterion.scale_type == ScaleType::Binary) {
        label = encode_ground_truth(label, criterion).to_string();
      }
      ++cs.counts[label];
      ++cs.total;
    }

    if (cs.total > 0) {
      int max_count = 0;
      for (const auto& [label, count] : cs.counts) {
        max_count = std::max(max_count, count);
      }
      cs.majority_fraction = static_cast<double>(max_count) / cs.total;

      // Entropy over the non-na support only; na labels stay in the counts
      // above but are not grade categories.
      std::vector<double> mass;
      int k = 0;
      if (criterion.scale_type == ScaleType::Binary) {
        k = 2;
        auto count_of = [&cs](const char* label) {
          auto it = cs.counts.find(label);
          return it == cs.counts.end() ? 0 : it->second;
        };
        mass = {static_cast<double>(count_of("MET")),
                static_cast<double>(count_of("UNMET"))};
      } else {
        for (const CriterionOption& opt : criterion.options) {
          if (opt.na) continue;
          ++k;
          auto it = cs.counts.find(opt.label);
          mass.push_back(it == cs.counts.end() ? 0.0 : it->second);
        }
      }
      double assessable = 0.0;
      for (double m : mass) assessable += m;
      if (k >= 2 && assessable > 0.0) {
        double entropy = 0.0;
        for (double m : mass) {
          if (m <= 0.0) continue;
          const double p = m / assessable;
          entropy -= p * std::log(p);
        }
        cs.normalized_entropy = entropy / std::log(static_cast<double>(k));
      }
    }
    stats.per_criterion.push_back(std::move(cs));
  }
  return stats;
}

}  // namespace rubriceval
