#include <doctest.h>

#include <algorithm>
#include <set>

#include "slnlink/graph.hpp"
#include "slnlink/rng.hpp"

using namespace slnlink;

namespace {

TemporalGraph random_graph(Rng& rng, int max_nodes = 20, int max_events = 40,
                           const std::string& tag = "rand") {
  const int n = 2 + int(rng.below(std::uint64_t(max_nodes - 1)));
  const int m = int(rng.below(std::uint64_t(max_events + 1)));
  std::vector<EdgeEvent> events;
  for (int i = 0; i < m; ++i) {
    int u = int(rng.below(std::uint64_t(n)));
    int w = int(rng.below(std::uint64_t(n - 1)));
    int v = w < u ? w : w + 1;
    events.push_back(EdgeEvent{u, v, rng.uniform()});
  }
  return build_graph(n, std::move(events), 1.0 + 9.0 * rng.uniform(), tag);
}

}  // namespace

TEST_CASE("build_graph sorts, canonicalizes, and validates") {
  TemporalGraph g = build_graph(3, {{0, 1, 0.2}, {1, 2, 0.8}}, 5.0, "a");
  CHECK(g.num_nodes() == 3);
  CHECK(g.events().size() == 2);
  CHECK(g.events()[0].timestamp == 0.2);

  // symmetry + sort: stored canonical with ascending timestamps
  TemporalGraph h = build_graph(2, {{1, 0, 0.9}, {0, 1, 0.1}}, 5.0, "b");
  CHECK(h.events()[0].u == 0);
  CHECK(h.events()[0].v == 1);
  CHECK(h.events()[0].timestamp == 0.1);
  CHECK(h.events()[1].timestamp == 0.9);

  CHECK_THROWS_AS(build_graph(2, {{0, 0, 0.5}}, 5.0, "c"), std::invalid_argument);
  CHECK_THROWS_AS(build_graph(2, {{0, 2, 0.5}}, 5.0, "c"), std::invalid_argument);
  CHECK_THROWS_AS(build_graph(2, {{0, 1, 1.5}}, 5.0, "c"), std::invalid_argument);
  CHECK_THROWS_AS(build_graph(2, {{0, 1, -0.1}}, 5.0, "c"), std::invalid_argument);
}

TEST_CASE("snapshot collapses duplicates and thresholds by progress") {
  TemporalGraph g =
      build_graph(5, {{0, 1, 0.1}, {1, 2, 0.4}, {2, 3, 0.4}, {3, 4, 0.9}}, 5.0, "a");
  CHECK(snapshot(g, 0.5).num_edges() == 3);
  CHECK(snapshot(g, 0.0).num_edges() == 0);
  CHECK(snapshot(g, 1.0).num_edges() == 4);

  TemporalGraph dup = build_graph(3, {{0, 1, 0.1}, {0, 1, 0.2}, {1, 2, 0.3}}, 5.0, "a");
  CHECK(snapshot(dup, 1.0).num_edges() == 2);

  CHECK_THROWS_AS(snapshot(g, 1.5), std::invalid_argument);
}

TEST_CASE("snapshot edges are monotone in progress and symmetric") {
  Rng rng(101);
  for (int iter = 0; iter < 200; ++iter) {
    TemporalGraph g = random_graph(rng);
    double p1 = rng.uniform();
    double p2 = rng.uniform();
    if (p1 > p2) std::swap(p1, p2);
    SnapshotView a = snapshot(g, p1);
    SnapshotView b = snapshot(g, p2);
    std::set<Edge> be(b.edges.begin(), b.edges.end());
    for (const Edge& e : a.edges) CHECK(be.count(e) == 1);
    for (int i = 0; i < b.num_nodes(); ++i) {
      for (int j : b.neighbors[i]) CHECK(b.has_edge(j, i));
    }
    for (const auto& ns : b.neighbors) {
      CHECK(std::adjacent_find(ns.begin(), ns.end()) == ns.end());
    }
  }
}

TEST_CASE("merge is a disjoint union with provenance ranges") {
  TemporalGraph a = build_graph(3, {{0, 1, 0.1}, {1, 2, 0.2}}, 5.0, "A");
  TemporalGraph b = build_graph(4, {{0, 1, 0.3}, {1, 2, 0.4}, {2, 3, 0.5}}, 8.0, "B");
  TemporalGraph m = merge({a, b});
  CHECK(m.num_nodes() == 7);
  CHECK(m.events().size() == 5);
  CHECK(snapshot(m, 1.0).num_edges() == 5);

  // no cross edges: all B events live in [3,7)
  for (const auto& e : m.events()) {
    const bool in_a = e.u < 3 && e.v < 3;
    const bool in_b = e.u >= 3 && e.v >= 3;
    CHECK((in_a || in_b));
  }
  CHECK(m.provenance_of("A").begin == 0);
  CHECK(m.provenance_of("A").end == 3);
  CHECK(m.provenance_of("B").begin == 3);
  CHECK(m.provenance_of("B").end == 7);
  CHECK(m.node_id(4).dataset_tag == "B");
  CHECK(m.node_id(4).local_index == 1);

  CHECK_THROWS_AS(merge({a, a}), std::invalid_argument);
  CHECK_THROWS_AS(merge({}), std::invalid_argument);
}

TEST_CASE("merge of one graph is the identity") {
  TemporalGraph a = build_graph(3, {{0, 1, 0.1}, {1, 2, 0.2}}, 5.0, "A");
  TemporalGraph m = merge({a});
  CHECK(m.num_nodes() == a.num_nodes());
  CHECK(m.events() == a.events());
  CHECK(m.duration_weeks() == a.duration_weeks());
}

TEST_CASE("merge counts are additive over random graphs") {
  Rng rng(7);
  for (int iter = 0; iter < 100; ++iter) {
    TemporalGraph a = random_graph(rng, 15, 30, "A");
    TemporalGraph b = random_graph(rng, 15, 30, "B");
    TemporalGraph c = random_graph(rng, 15, 30, "C");
    TemporalGraph m = merge({a, b, c});
    CHECK(m.num_nodes() == a.num_nodes() + b.num_nodes() + c.num_nodes());
    CHECK(m.events().size() == a.events().size() + b.events().size() + c.events().size());
    CHECK(snapshot(m, 1.0).num_edges() == snapshot(a, 1.0).num_edges() +
                                              snapshot(b, 1.0).num_edges() +
                                              snapshot(c, 1.0).num_edges());
  }
}

TEST_CASE("restrict_pairs filters by provenance range") {
  TemporalGraph a = build_graph(3, {{0, 1, 0.1}}, 5.0, "A");
  TemporalGraph b = build_graph(4, {{0, 1, 0.2}}, 5.0, "B");
  TemporalGraph m = merge({a, b});
  std::vector<Edge> pairs{{0, 2}, {3, 5}, {1, 4}};
  CHECK(restrict_pairs(m, "A", pairs) == std::vector<Edge>{{0, 2}});
  CHECK(restrict_pairs(m, "B", pairs) == std::vector<Edge>{{3, 5}});
  CHECK(restrict_pairs(m, "A", {}).empty());
  CHECK_THROWS_AS(restrict_pairs(m, "nope", pairs), std::invalid_argument);
}

TEST_CASE("restrict_pairs on all pairs recovers exactly the internal pairs") {
  Rng rng(13);
  TemporalGraph a = random_graph(rng, 8, 12, "A");
  TemporalGraph b = random_graph(rng, 8, 12, "B");
  TemporalGraph m = merge({a, b});
  std::vector<Edge> all;
  for (int u = 0; u < m.num_nodes(); ++u) {
    for (int v = u + 1; v < m.num_nodes(); ++v) all.push_back({u, v});
  }
  auto in_a = restrict_pairs(m, "A", all);
  const int na = a.num_nodes();
  CHECK(int(in_a.size()) == na * (na - 1) / 2);
  for (const Edge& e : in_a) CHECK(e.v < na);
}

TEST_CASE("graph_stats reports counts, density, and degree summary") {
  TemporalGraph g = build_graph(3, {{0, 1, 0.1}, {0, 1, 0.2}, {1, 2, 0.3}}, 5.0, "a");
  GraphStats s = graph_stats(g);
  CHECK(s.num_nodes == 3);
  CHECK(s.distinct_edges == 2);
  CHECK(s.num_events == 3);
  CHECK(s.duration_weeks == 5.0);

  TemporalGraph empty = build_graph(4, {}, 5.0, "e");
  CHECK(graph_stats(empty).density == 0.0);
  CHECK(graph_stats(empty).degree_max == 0);

  // star on 5 nodes
  TemporalGraph star =
      build_graph(5, {{0, 1, 0.1}, {0, 2, 0.2}, {0, 3, 0.3}, {0, 4, 0.4}}, 5.0, "s");
  GraphStats ss = graph_stats(star);
  CHECK(ss.degree_min == 1);
  CHECK(ss.degree_max == 4);
  CHECK(ss.degree_median == 1.0);
}
