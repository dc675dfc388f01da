#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rubriceval/rubric.hpp"

namespace rubriceval {

struct DatasetItem {
  std::string item_id;
  // The text under evaluation. May itself be serialized conversation JSON;
  // the engine treats it as opaque.
  std::string submission;
  // Free-form context for humans; never shown to judges or used in scoring.
  std::string description;
  // Reference labels aligned positionally with the rubric's criteria:
  // "MET"/"UNMET" (or "TRUE"/"FALSE") for binary criteria, the exact option
  // label for multi-option ones. Absent when the item is unlabeled.
  std::optional<std::vector<std::string>> ground_truth;
};

struct RubricDataset {
  std::optional<std::string> task_prompt;
  Rubric rubric;
  std::vector<DatasetItem> items;
};

// Schema: {task_prompt?, rubric: {criteria: [...]}, items: [{item_id?,
// submission, description?, ground_truth?}]}. Items without an id get
// positional ones (item0, item1, ...). Rubric validation and ground-truth
// alignment (list length == criterion count, every label decodable) are
// enforced here so later stages can assume a well-formed dataset.
RubricDataset load_dataset(const std::filesystem::path& path);
RubricDataset dataset_from_json(const nlohmann::json& doc);

nlohmann::json dataset_to_json(const RubricDataset& dataset);
void save_dataset(const RubricDataset& dataset, const std::filesystem::path& path);

// "TRUE"/"MET" -> MET and "FALSE"/"UNMET" -> UNMET on binary criteria; on
// multi-option criteria the label must equal an option label exactly
// (case-sensitive) and maps to that option's index, na options included.
// Unknown labels throw ValidationError listing the accepted ones.
Verdict encode_ground_truth(const std::string& label, const Criterion& criterion);

// Ground truth for one item as rubric-aligned verdicts; nullopt when the
// item carries no labels.
std::optional<std::vector<Verdict>> ground_truth_verdicts(const Rubric& rubric,
                                                          const DatasetItem& item);

struct CriterionLabelStats {
  std::string criterion_id;
  // Label -> count over labeled items, na-option labels included.
  std::map<std::string, int> counts;
  int total = 0;
  double majority_fraction = 0.0;
  // H(p)/log(k) over the k non-na categories, renormalized to exclude na
  // labels (they are tallied above but carry no grade information). 0 when
  // fewer than two non-na categories have mass.
  double normalized_entropy = 0.0;
};

struct DatasetStats {
  int n_items = 0;
  int n_labeled_items = 0;
  std::vector<CriterionLabelStats> per_criterion;
};

DatasetStats dataset_stats(const RubricDataset& dataset);

}  // namespace rubriceval
