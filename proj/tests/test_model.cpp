#include <doctest.h>

#include <filesystem>
#include <numeric>

#include "slnlink/model.hpp"
#include "slnlink/rng.hpp"

using namespace slnlink;
namespace fs = std::filesystem;

namespace {

TemporalGraph path_graph(int n) {
  std::vector<EdgeEvent> events;
  for (int i = 0; i + 1 < n; ++i) events.push_back({i, i + 1, 0.1});
  return build_graph(n, std::move(events), 1.0, "path");
}

TemporalGraph random_graph(Rng& rng, int n, int m) {
  std::vector<EdgeEvent> events;
  for (int i = 0; i < m; ++i) {
    int u = int(rng.below(std::uint64_t(n)));
    int w = int(rng.below(std::uint64_t(n - 1)));
    events.push_back(EdgeEvent{u, w < u ? w : w + 1, rng.uniform()});
  }
  return build_graph(n, std::move(events), 1.0, "rand");
}

}  // namespace

TEST_CASE("init_params shapes, zero biases, determinism") {
  ModelDims dims;
  ModelParams a = init_params(100, dims, 1);
  ModelParams b = init_params(100, dims, 1);
  CHECK(a.embeddings.rows() == 100);
  CHECK(a.embeddings.cols() == 16);
  CHECK(a.w1.rows() == 16);
  CHECK(a.w1.cols() == 16);
  CHECK(a.b1.isZero(0.0));
  CHECK(a.b2.isZero(0.0));
  CHECK(a.embeddings == b.embeddings);
  CHECK(a.w1 == b.w1);
  CHECK(a.w2 == b.w2);
  // uniform bound 1/sqrt(fan_in)
  CHECK(a.embeddings.cwiseAbs().maxCoeff() <= 0.25);
  CHECK(init_params(50, dims, 2).embeddings != init_params(50, dims, 3).embeddings);
  CHECK_THROWS_AS(init_params(0, dims, 1), std::invalid_argument);
}

TEST_CASE("isolated node keeps its own embedding through the mean") {
  TemporalGraph g = build_graph(3, {{0, 1, 0.1}}, 1.0, "iso");  // node 2 isolated
  SnapshotView snap = snapshot(g, 1.0);
  ModelParams params = init_params(3, {}, 5);
  ForwardTrace t = forward(params, snap);
  CHECK((t.mean0.row(2) - params.embeddings.row(2)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("one-neighbor mean with identity weights") {
  TemporalGraph g = build_graph(2, {{0, 1, 0.1}}, 1.0, "pair");
  SnapshotView snap = snapshot(g, 1.0);
  ModelParams params;
  params.embeddings.resize(2, 2);
  params.embeddings << 1.0, 0.0, 0.0, 1.0;
  params.w1 = Mat::Identity(2, 2);
  params.b1 = Vec::Zero(2);
  params.w2 = Mat::Identity(2, 2);
  params.b2 = Vec::Zero(2);
  ForwardTrace t = forward(params, snap);
  CHECK(t.h1(0, 0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(t.h1(0, 1) == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("constant features are a fixed point under identity weights") {
  TemporalGraph g = path_graph(3);
  SnapshotView snap = snapshot(g, 1.0);
  ModelParams params;
  params.embeddings = Mat::Ones(3, 1);
  params.w1 = Mat::Identity(1, 1);
  params.b1 = Vec::Zero(1);
  params.w2 = Mat::Identity(1, 1);
  params.b2 = Vec::Zero(1);
  ForwardTrace t = forward(params, snap);
  CHECK(t.h1.isApprox(Mat::Ones(3, 1)));
  CHECK(t.h2.isApprox(Mat::Ones(3, 1)));
}

TEST_CASE("final embeddings are non-negative under the default activation") {
  Rng rng(9);
  TemporalGraph g = random_graph(rng, 12, 30);
  SnapshotView snap = snapshot(g, 0.8);
  ModelParams params = init_params(12, {}, 17);
  ForwardTrace t = forward(params, snap);
  CHECK(t.h1.minCoeff() >= 0.0);
  CHECK(t.h2.minCoeff() >= 0.0);
  PairScores s = score_pairs(t, {{0, 1}, {2, 5}, {3, 9}});
  for (double raw : s.raw) CHECK(raw >= 0.0);
  for (double p : s.prob) CHECK(p >= 0.5);

  ModelDims no_final;
  no_final.final_activation = false;
  ModelParams params2 = init_params(12, no_final, 17);
  ForwardTrace t2 = forward(params2, snap);
  CHECK(t2.h2.minCoeff() < 0.0);  // with this seed some outputs go negative
}

TEST_CASE("score_pairs: zero embeddings, known sigmoid, symmetry") {
  ForwardTrace t;
  t.h2 = Mat::Zero(3, 2);
  t.h2.row(1) << 1.0, 1.0;
  t.h2.row(2) << 1.0, 1.0;
  PairScores s = score_pairs(t, {{0, 1}, {1, 2}});
  CHECK(s.raw[0] == 0.0);
  CHECK(s.prob[0] == 0.5);
  CHECK(s.raw[1] == 2.0);
  CHECK(s.prob[1] == doctest::Approx(0.8807970779778823).epsilon(1e-12));

  Rng rng(31);
  Mat h = Mat::Random(6, 4);
  ForwardTrace tr;
  tr.h2 = h;
  PairScores fwd = score_pairs(tr, {{1, 4}});
  PairScores rev = score_pairs(tr, {{4, 1}});
  CHECK(fwd.raw[0] == rev.raw[0]);

  CHECK_THROWS_AS(score_pairs(tr, {{0, 6}}), std::invalid_argument);
}

TEST_CASE("forward is permutation equivariant") {
  Rng rng(77);
  for (int iter = 0; iter < 25; ++iter) {
    const int n = 8;
    TemporalGraph g = random_graph(rng, n, 14);
    SnapshotView snap = snapshot(g, 0.9);
    ModelParams params = init_params(n, {8, 8, 8, true}, rng.next_u64());
    ForwardTrace base = forward(params, snap);

    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    rng.shuffle(perm);

    std::vector<EdgeEvent> permuted_events;
    for (const auto& e : g.events()) {
      permuted_events.push_back(EdgeEvent{perm[e.u], perm[e.v], e.timestamp});
    }
    TemporalGraph pg = build_graph(n, std::move(permuted_events), 1.0, "perm");
    SnapshotView psnap = snapshot(pg, 0.9);
    ModelParams pparams = params;
    for (int i = 0; i < n; ++i) pparams.embeddings.row(perm[i]) = params.embeddings.row(i);
    ForwardTrace permuted = forward(pparams, psnap);
    for (int i = 0; i < n; ++i) {
      CHECK((permuted.h2.row(perm[i]) - base.h2.row(i)).cwiseAbs().maxCoeff() < 1e-12);
    }
  }
}

TEST_CASE("sampled forward saturates to the full forward") {
  Rng rng(5);
  TemporalGraph g = random_graph(rng, 10, 25);
  SnapshotView snap = snapshot(g, 0.9);
  ModelParams params = init_params(10, {}, 3);
  ForwardTrace full = forward(params, snap);
  ForwardTrace sampled = forward_sampled(params, snap, {64, 64}, 99);
  CHECK(sampled.h2.isApprox(full.h2, 1e-15));

  // isolated node: identical regardless of fanout
  TemporalGraph iso = build_graph(3, {{0, 1, 0.1}}, 1.0, "iso");
  SnapshotView isnap = snapshot(iso, 1.0);
  ModelParams ip = init_params(3, {}, 4);
  CHECK(forward_sampled(ip, isnap, {1, 1}, 7).h2.row(2).isApprox(forward(ip, isnap).h2.row(2)));

  ForwardTrace s1 = forward_sampled(params, snap, {2, 2}, 123);
  ForwardTrace s2 = forward_sampled(params, snap, {2, 2}, 123);
  CHECK(s1.h2 == s2.h2);
  CHECK_THROWS_AS(forward_sampled(params, snap, {0, 2}, 1), std::invalid_argument);
}

TEST_CASE("checkpoint save/load round trip is bit exact") {
  Rng rng(1);
  ModelParams p = init_params(17, {16, 16, 16, true}, 42);
  p.b1 = Vec::Random(16);
  p.b2 = Vec::Random(16);
  fs::path path = fs::temp_directory_path() / "slnlink-ckpt-test.txt";
  save_params(p, path.string());
  ModelParams q = load_params(path.string());
  CHECK(q.embeddings == p.embeddings);
  CHECK(q.w1 == p.w1);
  CHECK(q.b1 == p.b1);
  CHECK(q.w2 == p.w2);
  CHECK(q.b2 == p.b2);
  CHECK(q.final_activation == p.final_activation);
  fs::remove(path);

  CHECK_THROWS_AS(load_params((fs::temp_directory_path() / "nope.ckpt").string()),
                  std::runtime_error);
}

TEST_CASE("forward rejects mismatched shapes") {
  TemporalGraph g = path_graph(4);
  SnapshotView snap = snapshot(g, 1.0);
  ModelParams p = init_params(5, {}, 1);
  CHECK_THROWS_AS(forward(p, snap), std::invalid_argument);
}
