#pragma once

#include <cstdint>
#include <string>
#include <vector>

// Temporal interaction graphs: students as nodes, timestamped undirected
// interaction events as edges. Timestamps live on a common [0,1] axis
// (fraction of the course elapsed) so that courses of different lengths
// can be merged and snapshotted consistently.

namespace slnlink {

struct NodeId {
  std::string dataset_tag;
  int local_index = 0;
};

// Canonical undirected pair, u < v.
struct Edge {
  int u = 0;
  int v = 0;

  friend bool operator==(const Edge&, const Edge&) = default;
  friend auto operator<=>(const Edge&, const Edge&) = default;
};

inline Edge make_edge(int a, int b) { return a < b ? Edge{a, b} : Edge{b, a}; }

inline std::uint64_t edge_key(const Edge& e) {
  return (std::uint64_t(std::uint32_t(e.u)) << 32) | std::uint32_t(e.v);
}

struct EdgeEvent {
  int u = 0;  // canonical: u < v
  int v = 0;
  double timestamp = 0.0;  // fraction of course elapsed, in [0,1]

  friend bool operator==(const EdgeEvent&, const EdgeEvent&) = default;
};

struct ProvenanceRange {
  std::string tag;
  int begin = 0;  // global node range [begin, end)
  int end = 0;
  double duration_weeks = 0.0;
};

// Immutable once built; safe to share across threads.
class TemporalGraph {
 public:
  TemporalGraph() = default;

  int num_nodes() const { return num_nodes_; }
  const std::vector<EdgeEvent>& events() const { return events_; }
  double duration_weeks() const { return duration_weeks_; }
  const std::vector<ProvenanceRange>& provenance() const { return provenance_; }

  NodeId node_id(int global_index) const;
  const ProvenanceRange& provenance_of(const std::string& tag) const;

  friend TemporalGraph build_graph(int num_nodes,
                                   std::vector<EdgeEvent> events,
                                   double duration_weeks,
                                   const std::string& tag);
  friend TemporalGraph merge(const std::vector<TemporalGraph>& graphs);

 private:
  int num_nodes_ = 0;
  std::vector<EdgeEvent> events_;  // sorted non-decreasing by timestamp
  double duration_weeks_ = 0.0;
  std::vector<ProvenanceRange> provenance_;
};

// Frozen binary adjacency of all interactions with timestamp <= progress.
// Holds a pointer to its parent graph; the parent must outlive the view.
class SnapshotView {
 public:
  const TemporalGraph* parent = nullptr;
  double progress = 0.0;
  std::vector<std::vector<int>> neighbors;  // sorted, no duplicates
  std::vector<Edge> edges;                  // canonical, sorted

  int num_nodes() const { return int(neighbors.size()); }
  int num_edges() const { return int(edges.size()); }
  int degree(int i) const { return int(neighbors[i].size()); }
  bool has_edge(int a, int b) const;
};

struct GraphStats {
  int num_nodes = 0;
  int distinct_edges = 0;
  int num_events = 0;  // posts proxy
  double duration_weeks = 0.0;
  double density = 0.0;
  int degree_min = 0;
  double degree_median = 0.0;
  int degree_max = 0;
};

// Validates, canonicalizes endpoint order, and sorts events by timestamp
// (stable, so same-timestamp duplicates keep their input order).
TemporalGraph build_graph(int num_nodes,
                          std::vector<EdgeEvent> events,
                          double duration_weeks,
                          const std::string& tag);

// Duplicate events between the same pair collapse to a single edge here.
SnapshotView snapshot(const TemporalGraph& g, double progress);

// Disjoint union. Tags must be pairwise distinct; no cross-graph edges are
// created. Node ranges follow input order; per-source timestamps are kept
// as-is (already normalized per course).
TemporalGraph merge(const std::vector<TemporalGraph>& graphs);

// Keeps only pairs whose both endpoints fall inside `tag`'s node range.
std::vector<Edge> restrict_pairs(const TemporalGraph& g,
                                 const std::string& tag,
                                 const std::vector<Edge>& pairs);

GraphStats graph_stats(const TemporalGraph& g);

}  // namespace slnlink
