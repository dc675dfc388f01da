#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rubriceval/dataset.hpp"

namespace rubriceval {

struct FewShotConfig {
  int n_examples = 3;
  // Round-robin over ground-truth verdict classes so the judge cannot read
  // a base rate off the exemplars. Binary classes are MET/UNMET; for
  // multi-option criteria the classes are the options, visited in rubric
  // order.
  bool balance_verdicts = true;
  bool include_reason = false;
  std::uint64_t seed = 0;
};

struct DatasetSplit {
  std::vector<DatasetItem> train;
  std::vector<DatasetItem> test;
};

// Deterministic under (items, n_train, stratify, seed). Without
// stratification this is a seeded shuffle cut at n_train. With it, each
// stratum contributes a largest-remainder quota so train proportions match
// the global ones within one item per stratum. `strata_labels`, when given,
// must align with `items`; otherwise the label of item i is its first
// criterion's ground-truth label, and items without ground truth make
// stratification a ConfigError.
DatasetSplit split_train_test(std::span<const DatasetItem> items, std::size_t n_train,
                              bool stratify, std::uint64_t seed,
                              const std::vector<std::string>* strata_labels = nullptr);

// Fraction variant: n_train = round(train_fraction * |items|).
DatasetSplit split_train_test(std::span<const DatasetItem> items, double train_fraction,
                              bool stratify, std::uint64_t seed,
                              const std::vector<std::string>* strata_labels = nullptr);

struct Exemplar {
  std::string item_id;
  std::string submission;
  std::string verdict_label;  // "MET"/"UNMET" or the option label
  std::string reason;         // may be empty; rendered only on request
};

// Up to n_examples exemplars for one criterion, drawn without replacement
// from labeled train items. Items whose label carries no assessable signal
// for this criterion (na options) are not eligible. When balancing, each
// class's pool is shuffled and classes are drained round-robin; classes
// that run dry drop out (availability fallback). Returns fewer than
// n_examples when train is exhausted; never throws for that.
std::vector<Exemplar> sample_few_shot(std::span<const DatasetItem> train,
                                      const Rubric& rubric, std::size_t criterion_index,
                                      const FewShotConfig& config);

// Text block embedded into judge prompts:
//
//   Example 1:
//   Submission: <text>
//   Verdict: MET
//   Reasoning: <text>      (only when include_reason and a reason exists)
//
// in sampling order, sections separated by blank lines. Empty input renders
// an empty block.
std::string render_exemplars(std::span<const Exemplar> exemplars, bool include_reason);

}  // namespace rubriceval
