#include "rubriceval/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "rubriceval/judging.hpp"
#include "rubriceval/rng.hpp"
#include "rubriceval/scoring.hpp"

namespace rubriceval {

namespace {

void seeded_shuffle(std::vector<std::size_t>& indices, SplitMix64& rng) {
  for (std::size_t i = indices.size(); i > 1; --i) {
    std::swap(indices[i - 1], indices[static_cast<std::size_t>(rng.below(i))]);
  }
}

}  // namespace

DatasetSplit split_train_test(std::span<const DatasetItem> items, std::size_t n_train,
                              bool stratify, std::uint64_t seed,
                              const std::vector<std::string>* strata_labels) {
  if (n_train > items.size()) {
    throw ConfigError("n_train " + std::to_string(n_train) + " exceeds item count " +
                      std::to_string(items.size()));
  }
  if (strata_labels != nullptr && strata_labels->size() != items.size()) {
    throw ConfigError("strata_labels length " + std::to_string(strata_labels->size()) +
                      " does not match item count " + std::to_string(items.size()));
  }

  DatasetSplit split;
  if (!stratify) {
    std::vector<std::size_t> order(items.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    SplitMix64 rng(seed);
    seeded_shuffle(order, rng);
    for (std::size_t pos = 0; pos < order.size(); ++pos) {
      (pos < n_train ? split.train : split.test).push_back(items[order[pos]]);
    }
    return split;
  }

  // Bucket items by stratum label, preserving input order inside a bucket.
  std::map<std::string, std::vector<std::size_t>> strata;
  for (std::size_t i = 0; i < items.size(); ++i) {
    std::string label;
    if (strata_labels != nullptr) {
      label = (*strata_labels)[i];
    } else if (items[i].ground_truth.has_value() && !(*items[i].ground_truth).empty()) {
      label = (*items[i].ground_truth)[0];
    } else {
      throw ConfigError("stratified split needs strata_labels or ground truth on "
                        "every item (missing on \"" +
                        items[i].item_id + "\")");
    }
    strata[label].push_back(i);
  }

  // Largest-remainder quotas: floor everyone, then hand leftover slots to
  // the largest fractional parts, so per-stratum train shares track the
  // global share within one item.
  struct Quota {
    std::string label;
    std::size_t take;
    double remainder;
  };
  std::vector<Quota> quotas;
  std::size_t taken = 0;
  const double fraction =
      items.empty() ? 0.0 : static_cast<double>(n_train) / static_cast<double>(items.size());
  for (const auto& [label, members] : strata) {
    const double exact = fraction * static_cast<double>(members.size());
    const std::size_t floor_take =
        std::min(members.size(), static_cast<std::size_t>(exact));
    quotas.push_back({label, floor_take, exact - static_cast<double>(floor_take)});
    taken += floor_take;
  }
  std::stable_sort(quotas.begin(), quotas.end(),
                   [](const Quota& a, const Quota& b) { return a.remainder > b.remainder; });
  for (Quota& q : quotas) {
    if (taken >= n_train) break;
    if (q.take < strata[q.label].size()) {
      ++q.take;
      ++taken;
    }
  }
  // Rounding can still leave slots unfilled when some strata saturate;
  // spill the rest into whichever strata have room, largest first.
  if (taken < n_train) {
    std::stable_sort(quotas.begin(), quotas.end(), [&](const Quota& a, const Quota& b) {
      return strata[a.label].size() - a.take > strata[b.label].size() - b.take;
    });
    for (Quota& q : quotas) {
      while (taken < n_train && q.take < strata[q.label].size()) {
        ++q.take;
        ++taken;
      }
    }
  }

  // One generator, strata visited in label order: deterministic regardless
  // of how the buckets were built.
  SplitMix64 rng(seed);
  std::map<std::string, std::size_t> take_by_label;
  for (const Quota& q : quotas) take_by_label[q.label] = q.take;
  std::vector<bool> in_train(items.size(), false);
  for (auto& [label, members] : strata) {
    seeded_shuffle(members, rng);
    const std::size_t take = take_by_label[label];
    for (std::size_t j = 0; j < take; ++j) in_train[members[j]] = true;
  }
  for (std::size_t i = 0; i < items.size(); ++i) {
    (in_train[i] ? split.train : split.test).push_back(items[i]);
  }
  return split;
}

DatasetSplit split_train_test(std::span<const DatasetItem> items, double train_fraction,
                              bool stratify, std::uint64_t seed,
                              const std::vector<std::string>* strata_labels) {
  if (train_fraction < 0.0 || train_fraction > 1.0) {
    throw ConfigError("train_fraction must be in [0,1], got " +
                      std::to_string(train_fraction));
  }
  const auto n_train = static_cast<std::size_t>(
      std::llround(train_fraction * static_cast<double>(items.size())));
  return split_train_test(items, n_train, stratify, seed, strata_labels);
}

std::vector<Exemplar> sample_few_shot(std::span<const DatasetItem> train,
                                      const Rubric& rubric, std::size_t criterion_index,
                                      const FewShotConfig& config) {
  if (criterion_index >= rubric.size()) {
    throw ConfigError("criterion_index " + std::to_string(criterion_index) +
                      " out of range for rubric of size " + std::to_string(rubric.size()));
  }
  const Criterion& criterion = rubric.at(criterion_index);
  std::vector<Exemplar> out;
  if (config.n_examples <= 0) return out;

  // Class order is fixed by the scale (MET before UNMET, options in rubric
  // order) so balancing is reproducible.
  std::vector<std::string> class_order;
  if (criterion.scale_type == ScaleType::Binary) {
    class_order = {"MET", "UNMET"};
  } else {
    for (const CriterionOption& opt : criterion.options) {
      if (!opt.na) class_order.push_back(opt.label);
    }
  }

  std::map<std::string, std::vector<std::size_t>> pools;
  for (std::size_t i = 0; i < train.size(); ++i) {
    const DatasetItem& item = train[i];
    if (!item.ground_truth.has_value()) continue;
    const std::string& raw_label = (*item.ground_truth)[criterion_index];
    const Verdict verdict = encode_ground_truth(raw_label, criterion);
    if (!verdict_value(criterion, verdict).has_value()) continue;  // na option
    const std::string key = criterion.scale_type == ScaleType::Binary
                                ? verdict.to_string()
                                : raw_label;
    pools[key].push_back(i);
  }

  // One generator shared across classes, classes shuffled in fixed order.
  SplitMix64 rng(derive_item_seed(config.seed, "few_shot", criterion.id, ""));
  for (const std::string& cls : class_order) {
    auto it = pools.find(cls);
    if (it != pools.end()) seeded_shuffle(it->second, rng);
  }

  auto emit = [&](std::size_t index) {
    const DatasetItem& item = train[index];
    Exemplar ex;
    ex.item_id = item.item_id;
    ex.submission = item.submission;
    ex.verdict_label = criterion.scale_type == ScaleType::Binary
                           ? encode_ground_truth((*item.ground_truth)[criterion_index],
                                                 criterion)
                                 .to_string()
                           : (*item.ground_truth)[criterion_index];
    out.push_back(std::move(ex));
  };

  if (config.balance_verdicts) {
    std::map<std::string, std::size_t> cursor;
    bool progressed = true;
    while (static_cast<int>(out.size()) < config.n_examples && progressed) {
      progressed = false;
      for (const std::string& cls : class_order) {
        if (static_cast<int>(out.size()) >= config.n_examples) break;
        auto it = pools.find(cls);
        if (it == pools.end() || cursor[cls] >= it->second.size()) continue;
        emit(it->second[cursor[cls]++]);
        progressed = true;
      }
    }
  } else {
    std::vector<std::size_t> all;
    for (const std::string& cls : class_order) {
      auto it = pools.find(cls);
      if (it == pools.end()) continue;
      all.insert(all.end(), it->second.begin(), it->second.end());
    }
    seeded_shuffle(all, rng);
    for (std::size_t index : all) {
      if (static_cast<int>(out.size()) >= config.n_examples) break;
      emit(index);
    }
  }
  return out;
}

std::string render_exemplars(std::span<const Exemplar> exemplars, bool include_reason) {
  std::string block;
  for (std::size_t i = 0; i < exemplars.size(); ++i) {
    if (i > 0) block += "\n\n";
    block += "Example " + std::to_string(i + 1) + ":\n";
    block += "Submission: " + exemplars[i].submission + "\n";
    block += "Verdict: " + exemplars[i].verdict_label;
    if (include_reason && !exemplars[i].reason.empty()) {
      block += "\nReasoning: " + exemplars[i].reason;
    }
  }
  return block;
}

}  // namespace rubriceval
