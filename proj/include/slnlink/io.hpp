#pragma once

#include <optional>
#include <string>
#include <vector>

#include "slnlink/graph.hpp"

// Edge-list CSV I/O and dataset manifests.
//
// CSV schema: UTF-8, header `src,dst,week`, integer node indices,
// non-negative decimal weeks. Lines starting with '#' are ignored.

namespace slnlink {

struct DatasetManifest {
  std::string tag;
  std::string path;
  double duration_weeks = 0.0;
  std::optional<int> expected_nodes;
  std::optional<int> expected_events;
};

// Loads an edge CSV, normalizing week timestamps to [0,1] by the manifest's
// duration and compacting node indices to a contiguous range (sorted by
// original id). Counts are checked against the manifest when present.
TemporalGraph load_edge_csv(const std::string& path, const DatasetManifest& manifest);

// Writes `src,dst,week` rows in stored event order. Weeks are chosen so
// that dividing by duration_weeks reproduces each stored timestamp exactly,
// making load_edge_csv(save_edge_csv(g)) the identity on graphs whose
// every node appears in at least one event.
void save_edge_csv(const TemporalGraph& g, const std::string& path);

DatasetManifest load_manifest(const std::string& path);

// One row per graph: tag, nodes, distinct edges, duration, posts, density.
// A merged graph reports "mixed" in the duration column when its sources
// had different durations.
std::string stats_table(const std::vector<const TemporalGraph*>& graphs);
std::string stats_table(const std::vector<TemporalGraph>& graphs);

}  // namespace slnlink
