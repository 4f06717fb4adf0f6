#include <doctest.h>

#include <algorithm>
#include <set>
#include <utility>

#include "slnlink/generator.hpp"
#include "slnlink/graph.hpp"

using namespace slnlink;

namespace {

GeneratorConfig small_config(std::uint64_t seed) {
  GeneratorConfig cfg;
  cfg.tag = "small";
  cfg.n_students = 40;
  cfg.n_threads = 60;
  cfg.duration_weeks = 5.0;
  cfg.activity_exponent = 0.8;
  cfg.replies_per_thread_mean = 3.0;
  cfg.participation_window = 2;
  cfg.seed = seed;
  return cfg;
}

}  // namespace

TEST_CASE("generator is deterministic per seed and varies across seeds") {
  TemporalGraph a = generate_synthetic_sln(small_config(7));
  TemporalGraph b = generate_synthetic_sln(small_config(7));
  CHECK(a.events() == b.events());

  int differing = 0;
  for (std::uint64_t s = 0; s < 10; ++s) {
    TemporalGraph x = generate_synthetic_sln(small_config(s));
    TemporalGraph y = generate_synthetic_sln(small_config(s + 1000));
    if (x.events() != y.events()) ++differing;
  }
  CHECK(differing == 10);
}

TEST_CASE("participation window bounds events per reply") {
  GeneratorConfig cfg = small_config(3);
  cfg.participation_window = 1;
  cfg.replies_per_thread_mean = 6.0;
  TemporalGraph g = generate_synthetic_sln(cfg);
  // With window 1 each reply creates at most one event, so the number of
  // events cannot exceed the per-thread reply cap times the thread count.
  CHECK(int(g.events().size()) <= cfg.n_threads * 50);

  // Thread RNG streams are window-independent, so widening the window with
  // the same seed keeps every window-1 link and can only add more.
  GeneratorConfig wide = cfg;
  wide.participation_window = 3;
  TemporalGraph gw = generate_synthetic_sln(wide);
  CHECK(gw.events().size() >= g.events().size());
  std::multiset<std::pair<int, int>> narrow_pairs, wide_pairs;
  for (const auto& e : g.events()) narrow_pairs.insert({e.u, e.v});
  for (const auto& e : gw.events()) wide_pairs.insert({e.u, e.v});
  CHECK(std::includes(wide_pairs.begin(), wide_pairs.end(), narrow_pairs.begin(),
                      narrow_pairs.end()));
}

TEST_CASE("generator rejects degenerate configs") {
  GeneratorConfig cfg = small_config(1);
  cfg.n_students = 1;
  CHECK_THROWS_AS(generate_synthetic_sln(cfg), std::invalid_argument);
  cfg = small_config(1);
  cfg.replies_per_thread_mean = 0.0;
  CHECK_THROWS_AS(generate_synthetic_sln(cfg), std::invalid_argument);
  cfg = small_config(1);
  cfg.participation_window = 0;
  CHECK_THROWS_AS(generate_synthetic_sln(cfg), std::invalid_argument);
}

TEST_CASE("all generated timestamps are valid and sorted") {
  TemporalGraph g = generate_synthetic_sln(small_config(11));
  double prev = 0.0;
  for (const auto& e : g.events()) {
    CHECK(e.timestamp >= 0.0);
    CHECK(e.timestamp <= 1.0);
    CHECK(e.timestamp >= prev);
    prev = e.timestamp;
  }
}

TEST_CASE("preset configs exist and unknown names are rejected") {
  for (const auto& name : preset_names()) {
    GeneratorConfig cfg = preset_config(name, 42);
    CHECK(cfg.n_students >= 2);
    CHECK(cfg.tag == name);
  }
  CHECK_THROWS_AS(preset_config("definitely-not-a-preset"), std::invalid_argument);
}

TEST_CASE("shipped presets hit their calibration targets within 25 percent") {
  struct Target {
    const char* name;
    int nodes, edges, posts;
  };
  // node / distinct-edge / post targets for the four shipped configs
  const Target targets[] = {
      {"vs-like", 677, 4702, 7484},
      {"ml-like", 3290, 30610, 25481},
      {"al-like", 1165, 6773, 16276},
      {"cp-like", 900, 3418, 8255},
  };
  for (const auto& t : targets) {
    CAPTURE(t.name);
    TemporalGraph g = generate_synthetic_sln(preset_config(t.name, 42));
    GraphStats s = graph_stats(g);
    CHECK(s.num_nodes == t.nodes);
    CHECK(s.distinct_edges >= int(0.75 * t.edges));
    CHECK(s.distinct_edges <= int(1.25 * t.edges));
    CHECK(s.num_events >= int(0.75 * t.posts));
    CHECK(s.num_events <= int(1.25 * t.posts));
  }
}

TEST_CASE("vs-like degree distribution is heavy tailed") {
  TemporalGraph g = generate_synthetic_sln(preset_config("vs-like", 42));
  GraphStats s = graph_stats(g);
  CHECK(double(s.degree_max) >= 5.0 * std::max(1.0, s.degree_median));
}
