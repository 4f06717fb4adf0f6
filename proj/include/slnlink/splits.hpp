#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "slnlink/graph.hpp"

// Supervised link-prediction tasks: an observed snapshot at progress p,
// the distinct future edges formed after p (and absent at p) as positives,
// seeded negative samples, and a k-fold partition of the positives.

namespace slnlink {

struct SplitRatios {
  double train_negative_ratio = 1.0;
  std::optional<double> eval_negative_ratio = 1.0;  // nullopt means "all non-edges"
};

struct SplitPlan {
  SnapshotView observed;
  double progress = 0.0;
  std::optional<double> horizon;  // nullopt means end-of-course
  std::vector<Edge> positives;    // canonical order, then folded by a seeded shuffle
  std::vector<std::vector<int>> folds;  // indices into positives
  SplitRatios ratios;
  std::uint64_t seed = 0;
  std::vector<std::string> warnings;

  double horizon_end() const { return horizon ? progress + *horizon : 1.0; }
  int k() const { return int(folds.size()); }
};

struct FoldTask {
  int fold_index = 0;
  std::vector<Edge> train_positives;
  std::vector<Edge> test_positives;
  std::vector<Edge> test_negatives;
};

// Distinct edges formed in (progress, progress+horizon] that are absent at
// `progress`, in canonical order.
std::vector<Edge> future_positives(const TemporalGraph& g, double progress,
                                   std::optional<double> horizon);

// Positives are shuffled by the seeded RNG and dealt round-robin into k
// folds, so fold sizes differ by at most one. Rejects when there are no
// future positives or when progress + horizon exceeds the course end.
SplitPlan make_split(const TemporalGraph& g, double progress, std::optional<double> horizon,
                     int k, const SplitRatios& ratios, std::uint64_t seed);

// Uniform sample without replacement over unordered node pairs excluding
// self-loops, observed edges, and `forbidden`. Rejects when fewer than
// `count` such pairs exist.
std::vector<Edge> sample_negatives(const SnapshotView& observed,
                                   const std::vector<Edge>& forbidden, int count,
                                   std::uint64_t seed);

// All unordered non-self pairs excluding observed edges and `forbidden`,
// in canonical order.
std::vector<Edge> all_negatives(const SnapshotView& observed, const std::vector<Edge>& forbidden);

// One task per fold; test negatives are drawn per fold, seeded by
// (plan.seed, fold_index), at eval_negative_ratio x |test positives|
// (or exhaustively in "all" mode).
std::vector<FoldTask> fold_tasks(const SplitPlan& plan);

std::string split_plan_json(const SplitPlan& plan);

}  // namespace slnlink
