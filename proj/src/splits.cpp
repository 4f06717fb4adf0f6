#include "slnlink/splits.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "slnlink/rng.hpp"

namespace slnlink {

namespace {

std::unordered_set<std::uint64_t> edge_set(const std::vector<Edge>& edges) {
  std::unordered_set<std::uint64_t> s;
  s.reserve(edges.size() * 2);
  for (const Edge& e : edges) s.insert(edge_key(e));
  return s;
}

}  // namespace

std::vector<Edge> future_positives(const TemporalGraph& g, double progress,
                                   std::optional<double> horizon) {
  if (horizon && progress + *horizon > 1.0) {
    throw std::invalid_argument("progress + horizon exceeds end of course");
  }
  const SnapshotView observed = snapshot(g, progress);
  const SnapshotView future = snapshot(g, horizon ? progress + *horizon : 1.0);
  const auto observed_set = edge_set(observed.edges);
  std::vector<Edge> out;
  for (const Edge& e : future.edges) {
    if (!observed_set.contains(edge_key(e))) out.push_back(e);
  }
  return out;
}

SplitPlan make_split(const TemporalGraph& g, double progress, std::optional<double> horizon,
                     int k, const SplitRatios& ratios, std::uint64_t seed) {
  if (!(progress > 0.0 && progress < 1.0)) {
    throw std::invalid_argument("progress must lie strictly inside (0,1)");
  }
  if (k < 1) throw std::invalid_argument("k must be >= 1");
  if (horizon) {
    if (*horizon <= 0.0) throw std::invalid_argument("horizon must be positive");
    if (progress + *horizon > 1.0) {
      throw std::invalid_argument("progress + horizon exceeds end of course");
    }
  }
  if (ratios.train_negative_ratio <= 0.0) {
    throw std::invalid_argument("train_negative_ratio must be positive");
  }
  if (ratios.eval_negative_ratio && *ratios.eval_negative_ratio <= 0.0) {
    throw std::invalid_argument("eval_negative_ratio must be positive or \"all\"");
  }

  SplitPlan plan;
  plan.observed = snapshot(g, progress);
  plan.progress = progress;
  plan.horizon = horizon;
  plan.ratios = ratios;
  plan.seed = seed;
  plan.positives = future_positives(g, progress, horizon);
  if (plan.positives.empty()) {
    throw std::invalid_argument("nothing to predict: no new edges form after progress " +
                                std::to_string(progress));
  }
  if (int(plan.positives.size()) < k) {
    plan.warnings.push_back("fewer positives (" + std::to_string(plan.positives.size()) +
                            ") than folds (" + std::to_string(k) + "); some folds are empty");
  }

  std::vector<int> order(plan.positives.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = int(i);
  Rng rng(seed);
  rng.shuffle(order);
  plan.folds.assign(k, {});
  for (std::size_t i = 0; i < order.size(); ++i) plan.folds[i % k].push_back(order[i]);
  return plan;
}

std::vector<Edge> all_negatives(const SnapshotView& observed, const std::vector<Edge>& forbidden) {
  const auto excluded = edge_set(forbidden);
  std::vector<Edge> out;
  const int n = observed.num_nodes();
  for (int u = 0; u < n; ++u) {
    for (int v = u + 1; v < n; ++v) {
      Edge e{u, v};
      if (!observed.has_edge(u, v) && !excluded.contains(edge_key(e))) out.push_back(e);
    }
  }
  return out;
}

std::vector<Edge> sample_negatives(const SnapshotView& observed,
                                   const std::vector<Edge>& forbidden, int count,
                                   std::uint64_t seed) {
  if (count < 0) throw std::invalid_argument("negative sample count must be >= 0");
  if (count == 0) return {};
  const int n = observed.num_nodes();
  const double total_pairs = double(n) * (n - 1) / 2.0;

  auto excluded = edge_set(forbidden);
  for (const Edge& e : observed.edges) excluded.insert(edge_key(e));
  const double available = total_pairs - double(excluded.size());
  if (double(count) > available) {
    throw std::invalid_argument("requested " + std::to_string(count) +
                                " negatives but only " + std::to_string(std::int64_t(available)) +
                                " non-edges exist");
  }

  Rng rng(seed);
  // Dense regime: enumerate and take a seeded prefix shuffle. Sparse
  // regime: rejection-sample, which is the common case for SLNs.
  if (4.0 * count >= available) {
    std::vector<Edge> pool;
    pool.reserve(std::size_t(available));
    for (int u = 0; u < n; ++u) {
      for (int v = u + 1; v < n; ++v) {
        if (!excluded.contains(edge_key(Edge{u, v}))) pool.push_back(Edge{u, v});
      }
    }
    for (int i = 0; i < count; ++i) {
      std::size_t j = i + std::size_t(rng.below(pool.size() - i));
      std::swap(pool[i], pool[j]);
    }
    pool.resize(count);
    return pool;
  }

  std::vector<Edge> out;
  out.reserve(count);
  std::unordered_set<std::uint64_t> chosen;
  chosen.reserve(count * 2);
  while (int(out.size()) < count) {
    int u = int(rng.below(std::uint64_t(n)));
    int w = int(rng.below(std::uint64_t(n - 1)));
    int v = w < u ? w : w + 1;
    Edge e = make_edge(u, v);
    std::uint64_t key = edge_key(e);
    if (excluded.contains(key) || chosen.contains(key)) continue;
    chosen.insert(key);
    out.push_back(e);
  }
  return out;
}

std::vector<FoldTask> fold_tasks(const SplitPlan& plan) {
  std::vector<FoldTask> tasks;
  tasks.reserve(plan.folds.size());

  std::vector<Edge> forbidden = plan.positives;  // plus observed handled by sample_negatives

  for (int f = 0; f < plan.k(); ++f) {
    FoldTask task;
    task.fold_index = f;
    std::vector<char> in_test(plan.positives.size(), 0);
    for (int idx : plan.folds[f]) in_test[idx] = 1;
    for (std::size_t i = 0; i < plan.positives.size(); ++i) {
      (in_test[i] ? task.test_positives : task.train_positives).push_back(plan.positives[i]);
    }
    if (plan.ratios.eval_negative_ratio) {
      const int want = int(std::llround(*plan.ratios.eval_negative_ratio *
                                        double(task.test_positives.size())));
      task.test_negatives =
          sample_negatives(plan.observed, forbidden, want, mix_seed(plan.seed, std::uint64_t(f)));
    } else {
      task.test_negatives = all_negatives(plan.observed, forbidden);
    }
    tasks.push_back(std::move(task));
  }
  return tasks;
}

std::string split_plan_json(const SplitPlan& plan) {
  nlohmann::ordered_json j;
  j["progress"] = plan.progress;
  if (plan.horizon) {
    j["horizon"] = *plan.horizon;
  } else {
    j["horizon"] = "end";
  }
  j["k"] = plan.k();
  j["seed"] = plan.seed;
  j["train_negative_ratio"] = plan.ratios.train_negative_ratio;
  if (plan.ratios.eval_negative_ratio) {
    j["eval_negative_ratio"] = *plan.ratios.eval_negative_ratio;
  } else {
    j["eval_negative_ratio"] = "all";
  }
  j["num_observed_edges"] = plan.observed.num_edges();
  auto& pos = j["positives"] = nlohmann::ordered_json::array();
  for (const Edge& e : plan.positives) pos.push_back({e.u, e.v});
  j["folds"] = plan.folds;
  if (!plan.warnings.empty()) j["warnings"] = plan.warnings;
  return j.dump(2) + "\n";
}

}  // namespace slnlink
