#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "n2hp/errors.hpp"
#include "n2hp/scorers.hpp"

namespace n2hp {

struct ConfusionMatrix {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::size_t tn = 0;
  double threshold = 0.0;

  std::size_t total() const { return tp + fp + fn + tn; }
  double f1() const {
    const std::size_t denom = 2 * tp + fp + fn;
    return denom == 0 ? 0.0 : 2.0 * static_cast<double>(tp) / denom;
  }
};

struct MetricReport {
  double auc = 0.0;
  double ap = 0.0;
  ScorerKind scorer = ScorerKind::N2HP;
  std::string dataset;
  std::size_t run = 0;
  std::uint64_t seed = 0;
};

namespace detail {

inline void check_finite(std::span<const double> scores, const char* what) {
  for (double s : scores) {
    if (!std::isfinite(s)) {
      throw InputError(std::string("non-finite score in ") + what);
    }
  }
}

}  // namespace detail

// Mann-Whitney statistic with ties counted as one half. The numerator is
// accumulated as an integer count of half-wins, so the result is exact.
inline double roc_auc(std::span<const double> pos, std::span<const double> neg) {
  if (pos.empty() || neg.empty()) {
    throw InputError("roc_auc needs at least one positive and one negative");
  }
  detail::check_finite(pos, "positives");
  detail::check_finite(neg, "negatives");
  std::vector<double> sorted(neg.begin(), neg.end());
  std::sort(sorted.begin(), sorted.end());
  std::uint64_t half_wins = 0;
  for (double p : pos) {
    auto [lo, hi] = std::equal_range(sorted.begin(), sorted.end(), p);
    half_wins += 2 * static_cast<std::uint64_t>(lo - sorted.begin()) +
                 static_cast<std::uint64_t>(hi - lo);
  }
  return static_cast<double>(half_wins) /
         (2.0 * static_cast<double>(pos.size()) *
          static_cast<double>(neg.size()));
}

enum class ApVariant {
  Step,          // sum_k (R_k - R_{k-1}) P_k
  Interpolated,  // precision replaced by its running maximum from the right
};

// Average precision over the descending-score ranking. Items with equal
// scores form one rank position: each positive in a tied block is credited
// with the precision at the end of the block, independently of input order.
inline double average_precision(std::span<const double> pos,
                                std::span<const double> neg,
                                ApVariant variant = ApVariant::Step) {
  if (pos.empty()) throw InputError("average_precision needs a positive");
  detail::check_finite(pos, "positives");
  detail::check_finite(neg, "negatives");
  std::vector<std::pair<double, bool>> items;
  items.reserve(pos.size() + neg.size());
  for (double s : pos) items.emplace_back(s, true);
  for (double s : neg) items.emplace_back(s, false);
  std::stable_sort(items.begin(), items.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });

  // (precision, positives in block) per tied block, in ranking order.
  std::vector<std::pair<double, std::size_t>> blocks;
  std::size_t seen = 0, hits = 0;
  for (std::size_t i = 0; i < items.size();) {
    std::size_t j = i;
    std::size_t block_hits = 0;
    while (j < items.size() && items[j].first == items[i].first) {
      block_hits += items[j].second ? 1 : 0;
      ++j;
    }
    seen += j - i;
    hits += block_hits;
    if (block_hits > 0) {
      blocks.emplace_back(static_cast<double>(hits) / static_cast<double>(seen),
                          block_hits);
    }
    i = j;
  }
  if (variant == ApVariant::Interpolated) {
    for (std::size_t b = blocks.size(); b-- > 1;) {
      blocks[b - 1].first = std::max(blocks[b - 1].first, blocks[b].first);
    }
  }
  // One addition per positive keeps the sum order identical to a
  // per-positive walk of the ranked list.
  double sum = 0.0;
  for (const auto& [precision, count] : blocks) {
    for (std::size_t c = 0; c < count; ++c) sum += precision;
  }
  return sum / static_cast<double>(pos.size());
}

// Predict positive iff score >= threshold.
inline ConfusionMatrix confusion_at(std::span<const double> scores,
                                    std::span<const int> labels,
                                    double threshold) {
  if (scores.size() != labels.size()) {
    throw DimensionError("scores and labels differ in length");
  }
  ConfusionMatrix c;
  c.threshold = threshold;
  for (std::size_t k = 0; k < scores.size(); ++k) {
    const bool predicted = scores[k] >= threshold;
    const bool actual = labels[k] != 0;
    if (predicted && actual) ++c.tp;
    else if (predicted) ++c.fp;
    else if (actual) ++c.fn;
    else ++c.tn;
  }
  return c;
}

struct F1Threshold {
  double threshold = 0.0;
  double f1 = 0.0;
};

// Sweeps every distinct score as a threshold. Ties on F1 go to the larger
// threshold.
inline F1Threshold best_f1_threshold(std::span<const double> scores,
                                     std::span<const int> labels) {
  if (scores.size() != labels.size()) {
    throw DimensionError("scores and labels differ in length");
  }
  detail::check_finite(scores, "scores");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  std::size_t positives = 0;
  for (int l : labels) positives += l != 0 ? 1 : 0;
  if (positives == 0) throw InputError("best_f1_threshold needs a positive");

  F1Threshold best{0.0, -1.0};
  std::size_t tp = 0, predicted = 0;
  for (std::size_t i = 0; i < order.size();) {
    const double t = scores[order[i]];
    while (i < order.size() && scores[order[i]] == t) {
      tp += labels[order[i]] != 0 ? 1 : 0;
      ++predicted;
      ++i;
    }
    const std::size_t fp = predicted - tp;
    const std::size_t fn = positives - tp;
    const double f1 = 2.0 * static_cast<double>(tp) /
                      static_cast<double>(2 * tp + fp + fn);
    if (f1 > best.f1) best = {t, f1};
  }
  return best;
}

// Mean scores per evaluation set, laid out as rows {test, val, all edges}
// by columns {edge, false edge}.
struct TwoHopMassTable {
  std::array<std::array<double, 2>, 3> mean{};

  static constexpr std::array<const char*, 3> kRows = {"test set", "val set",
                                                       "all edges"};
  static constexpr std::array<const char*, 2> kCols = {"edge", "false edge"};
};

struct TwoHopMassInput {
  std::span<const double> test_pos, test_neg;
  std::span<const double> val_pos, val_neg;
  std::span<const double> all_edges, false_edges;
};

inline TwoHopMassTable two_hop_mass_report(const TwoHopMassInput& in) {
  auto mean = [](std::span<const double> s, const char* name) {
    if (s.empty()) {
      throw InputError(std::string("two-hop mass: empty set ") + name);
    }
    double sum = 0.0;
    for (double x : s) sum += x;
    return sum / static_cast<double>(s.size());
  };
  TwoHopMassTable t;
  t.mean[0] = {mean(in.test_pos, "test_pos"), mean(in.test_neg, "test_neg")};
  t.mean[1] = {mean(in.val_pos, "val_pos"), mean(in.val_neg, "val_neg")};
  t.mean[2] = {mean(in.all_edges, "all_edges"),
               mean(in.false_edges, "false_edges")};
  return t;
}

struct SummaryRow {
  std::string dataset;
  ScorerKind scorer = ScorerKind::N2HP;
  std::size_t runs = 0;
  double auc_mean = 0.0;
  double auc_std = 0.0;
  double ap_mean = 0.0;
  double ap_std = 0.0;
};

struct AbsentDataset {
  std::string dataset;
  std::string reason;
};

struct Summary {
  std::vector<SummaryRow> rows;
  std::vector<AbsentDataset> absent;
  // Datasets cut short by the wall-clock budget.
  std::vector<std::string> partial;

  const SummaryRow* find(const std::string& dataset, ScorerKind scorer) const {
    for (const auto& r : rows) {
      if (r.dataset == dataset && r.scorer == scorer) return &r;
    }
    return nullptr;
  }
};

namespace detail {

// Population mean and standard deviation. Values are sorted first so the
// result does not depend on record order.
inline std::pair<double, double> mean_std(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  double sum = 0.0;
  for (double x : values) sum += x;
  const double mean = sum / static_cast<double>(values.size());
  double sq = 0.0;
  for (double x : values) sq += (x - mean) * (x - mean);
  return {mean, std::sqrt(sq / static_cast<double>(values.size()))};
}

}  // namespace detail

// Groups by (dataset, scorer) in first-appearance order.
inline Summary summarize(std::span<const MetricReport> records) {
  std::vector<std::pair<std::string, ScorerKind>> keys;
  std::map<std::pair<std::string, int>, std::pair<std::vector<double>,
                                                  std::vector<double>>>
      groups;
  for (const auto& r : records) {
    auto key = std::make_pair(r.dataset, static_cast<int>(r.scorer));
    auto [it, inserted] = groups.try_emplace(key);
    if (inserted) keys.emplace_back(r.dataset, r.scorer);
    it->second.first.push_back(r.auc);
    it->second.second.push_back(r.ap);
  }
  Summary s;
  for (const auto& [dataset, scorer] : keys) {
    const auto& [aucs, aps] =
        groups.at(std::make_pair(dataset, static_cast<int>(scorer)));
    SummaryRow row;
    row.dataset = dataset;
    row.scorer = scorer;
    row.runs = aucs.size();
    std::tie(row.auc_mean, row.auc_std) = detail::mean_std(aucs);
    std::tie(row.ap_mean, row.ap_std) = detail::mean_std(aps);
    s.rows.push_back(row);
  }
  return s;
}

}  // namespace n2hp
