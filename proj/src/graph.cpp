#include "slnlink/graph.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_set>

namespace slnlink {

NodeId TemporalGraph::node_id(int global_index) const {
  for (const auto& r : provenance_) {
    if (global_index >= r.begin && global_index < r.end) {
      return NodeId{r.tag, global_index - r.begin};
    }
  }
  throw std::invalid_argument("node index " + std::to_string(global_index) +
                              " outside graph of " + std::to_string(num_nodes_) + " nodes");
}

const ProvenanceRange& TemporalGraph::provenance_of(const std::string& tag) const {
  for (const auto& r : provenance_) {
    if (r.tag == tag) return r;
  }
  throw std::invalid_argument("unknown dataset tag '" + tag + "'");
}

bool SnapshotView::has_edge(int a, int b) const {
  if (a == b) return false;
  const auto& ns = neighbors[a];
  return std::binary_search(ns.begin(), ns.end(), b);
}

TemporalGraph build_graph(int num_nodes,
                          std::vector<EdgeEvent> events,
                          double duration_weeks,
                          const std::string& tag) {
  if (num_nodes < 0) throw std::invalid_argument("negative node count");
  if (duration_weeks <= 0.0) throw std::invalid_argument("duration_weeks must be positive");
  for (std::size_t i = 0; i < events.size(); ++i) {
    auto& e = events[i];
    if (!std::isfinite(e.timestamp) || e.timestamp < 0.0 || e.timestamp > 1.0) {
      throw std::invalid_argument("event " + std::to_string(i) + ": timestamp " +
                                  std::to_string(e.timestamp) + " outside [0,1]");
    }
    if (e.u == e.v) {
      throw std::invalid_argument("event " + std::to_string(i) + ": self-loop at node " +
                                  std::to_string(e.u));
    }
    if (e.u < 0 || e.v < 0 || e.u >= num_nodes || e.v >= num_nodes) {
      throw std::invalid_argument("event " + std::to_string(i) + ": endpoint out of range (" +
                                  std::to_string(e.u) + "," + std::to_string(e.v) + ") with " +
                                  std::to_string(num_nodes) + " nodes");
    }
    if (e.u > e.v) std::swap(e.u, e.v);
  }
  std::stable_sort(events.begin(), events.end(),
                   [](const EdgeEvent& a, const EdgeEvent& b) { return a.timestamp < b.timestamp; });

  TemporalGraph g;
  g.num_nodes_ = num_nodes;
  g.events_ = std::move(events);
  g.duration_weeks_ = duration_weeks;
  g.provenance_ = {ProvenanceRange{tag, 0, num_nodes, duration_weeks}};
  return g;
}

SnapshotView snapshot(const TemporalGraph& g, double progress) {
  if (!(progress >= 0.0 && progress <= 1.0)) {
    throw std::invalid_argument("progress " + std::to_string(progress) + " outside [0,1]");
  }
  SnapshotView view;
  view.parent = &g;
  view.progress = progress;
  view.neighbors.resize(g.num_nodes());

  std::unordered_set<std::uint64_t> seen;
  for (const auto& e : g.events()) {
    if (e.timestamp > progress) break;  // events are sorted
    Edge edge{e.u, e.v};
    if (seen.insert(edge_key(edge)).second) view.edges.push_back(edge);
  }
  std::sort(view.edges.begin(), view.edges.end());
  for (const auto& e : view.edges) {
    view.neighbors[e.u].push_back(e.v);
    view.neighbors[e.v].push_back(e.u);
  }
  for (auto& ns : view.neighbors) std::sort(ns.begin(), ns.end());
  return view;
}

TemporalGraph merge(const std::vector<TemporalGraph>& graphs) {
  if (graphs.empty()) throw std::invalid_argument("merge requires at least one graph");
  std::unordered_set<std::string> tags;
  for (const auto& g : graphs) {
    for (const auto& r : g.provenance()) {
      if (!tags.insert(r.tag).second) {
        throw std::invalid_argument("duplicate dataset tag '" + r.tag + "' in merge");
      }
    }
  }

  TemporalGraph out;
  int offset = 0;
  double max_duration = 0.0;
  for (const auto& g : graphs) {
    for (const auto& r : g.provenance()) {
      out.provenance_.push_back(ProvenanceRange{r.tag, r.begin + offset, r.end + offset,
                                                r.duration_weeks});
    }
    for (const auto& e : g.events()) {
      out.events_.push_back(EdgeEvent{e.u + offset, e.v + offset, e.timestamp});
    }
    offset += g.num_nodes();
    max_duration = std::max(max_duration, g.duration_weeks());
  }
  out.num_nodes_ = offset;
  out.duration_weeks_ = max_duration;
  std::stable_sort(out.events_.begin(), out.events_.end(),
                   [](const EdgeEvent& a, const EdgeEvent& b) { return a.timestamp < b.timestamp; });
  return out;
}

std::vector<Edge> restrict_pairs(const TemporalGraph& g,
                                 const std::string& tag,
                                 const std::vector<Edge>& pairs) {
  const auto& range = g.provenance_of(tag);
  std::vector<Edge> out;
  for (const auto& p : pairs) {
    if (p.u >= range.begin && p.u < range.end && p.v >= range.begin && p.v < range.end) {
      out.push_back(p);
    }
  }
  return out;
}

GraphStats graph_stats(const TemporalGraph& g) {
  GraphStats s;
  s.num_nodes = g.num_nodes();
  s.num_events = int(g.events().size());
  s.duration_weeks = g.duration_weeks();

  SnapshotView full = snapshot(g, 1.0);
  s.distinct_edges = full.num_edges();

  const double n = double(s.num_nodes);
  s.density = n >= 2.0 ? double(s.distinct_edges) / (n * (n - 1.0) / 2.0) : 0.0;

  if (s.num_nodes > 0) {
    std::vector<int> degrees(s.num_nodes);
    for (int i = 0; i < s.num_nodes; ++i) degrees[i] = full.degree(i);
    std::sort(degrees.begin(), degrees.end());
    s.degree_min = degrees.front();
    s.degree_max = degrees.back();
    const std::size_t m = degrees.size();
    s.degree_median = m % 2 == 1 ? double(degrees[m / 2])
                                 : 0.5 * (degrees[m / 2 - 1] + degrees[m / 2]);
  }
  return s;
}

}  // namespace slnlink
