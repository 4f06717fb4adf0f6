#include <doctest.h>

#include <cmath>

#include "slnlink/eval.hpp"
#include "slnlink/rng.hpp"
#include "slnlink/train.hpp"

using namespace slnlink;

namespace {

std::vector<double> random_scores(Rng& rng, int n, bool quantize) {
  std::vector<double> out;
  for (int i = 0; i < n; ++i) {
    double x = rng.uniform(-2.0, 2.0);
    if (quantize) x = std::round(x * 4.0) / 4.0;  // force heavy ties
    out.push_back(x);
  }
  return out;
}

}  // namespace

TEST_CASE("auc_pairwise basics") {
  CHECK(auc_pairwise({0.9}, {0.1}, TiePolicy::kStrict) == 1.0);
  CHECK(auc_pairwise({0.9}, {0.1}, TiePolicy::kHalf) == 1.0);
  CHECK(auc_pairwise({0.8, 0.4}, {0.6, 0.2}, TiePolicy::kHalf) == 0.75);
  CHECK(auc_pairwise({0.5}, {0.5}, TiePolicy::kStrict) == 0.0);
  CHECK(auc_pairwise({0.5}, {0.5}, TiePolicy::kHalf) == 0.5);
  CHECK_THROWS_AS(auc_pairwise({}, {0.1}, TiePolicy::kHalf), std::invalid_argument);
  CHECK_THROWS_AS(auc_pairwise({0.1}, {}, TiePolicy::kHalf), std::invalid_argument);
}

TEST_CASE("auc_rank equals pairwise half-tie AUC") {
  CHECK(auc_rank({0.3, 0.3, 0.3}, {0.3, 0.3}) == 0.5);
  CHECK(auc_rank({0.1}, {0.9}) == 0.0);

  Rng rng(61);
  for (int iter = 0; iter < 250; ++iter) {
    const bool quantize = iter % 4 != 0;  // most instances carry ties
    std::vector<double> pos = random_scores(rng, 1 + int(rng.below(120)), quantize);
    std::vector<double> neg = random_scores(rng, 1 + int(rng.below(120)), quantize);
    const double fast = auc_rank(pos, neg);
    const double slow = auc_pairwise(pos, neg, TiePolicy::kHalf);
    CHECK(std::abs(fast - slow) < 1e-12);
  }
}

TEST_CASE("auc is invariant under strictly increasing transforms") {
  Rng rng(62);
  for (int iter = 0; iter < 100; ++iter) {
    std::vector<double> pos = random_scores(rng, 30, iter % 2 == 0);
    std::vector<double> neg = random_scores(rng, 30, iter % 2 == 0);
    const double base = auc_rank(pos, neg);
    auto affine = [](double x) { return 3.0 * x + 7.0; };
    auto cubic = [](double x) { return x * x * x + 0.5 * x; };  // strictly increasing
    std::vector<double> pos_a, neg_a, pos_c, neg_c;
    for (double x : pos) {
      pos_a.push_back(affine(x));
      pos_c.push_back(cubic(x));
    }
    for (double x : neg) {
      neg_a.push_back(affine(x));
      neg_c.push_back(cubic(x));
    }
    CHECK(auc_rank(pos_a, neg_a) == doctest::Approx(base).epsilon(1e-12));
    CHECK(auc_rank(pos_c, neg_c) == doctest::Approx(base).epsilon(1e-12));
    // complement identity under the half policy
    CHECK(auc_rank(pos, neg) + auc_rank(neg, pos) == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("confusion at threshold 0.5 uses a strict inequality") {
  Confusion c = confusion_at_threshold({0.9}, {0.1});
  CHECK(c.true_positives == 1);
  CHECK(c.true_negatives == 1);
  CHECK(c.false_positives == 0);
  CHECK(c.false_negatives == 0);

  // a probability of exactly 0.5 predicts "no link"
  Confusion boundary = confusion_at_threshold({0.5}, {0.5});
  CHECK(boundary.true_positives == 0);
  CHECK(boundary.false_negatives == 1);
  CHECK(boundary.true_negatives == 1);

  // the all-zero-embedding model predicts nothing
  Confusion degenerate = confusion_at_threshold({0.5, 0.5, 0.5}, {0.5, 0.5});
  CHECK(degenerate.true_positives == 0);
  CHECK(degenerate.false_positives == 0);
}

TEST_CASE("welch t-test matches the precomputed reference values") {
  struct Case {
    std::vector<double> a, b;
    double t, df, p;
  };
  // reference statistics computed with an independent high-precision
  // implementation before this module was written
  const Case cases[] = {
      {{0.9, 0.91, 0.92}, {0.80, 0.81, 0.82}, 12.24744871391591, 4.0, 0.00012760837472096246},
      {{0.85, 0.82, 0.88, 0.90}, {0.84, 0.86, 0.83}, 0.9780594877938924, 4.3011716057891105,
       0.18989851147057812},
      {{0.70, 0.72, 0.71, 0.69, 0.73}, {0.75, 0.74, 0.76, 0.77, 0.74}, -4.5825756949558398,
       7.7199124726477013, 0.99901518020349667},
      {{0.95, 0.94, 0.96, 0.93, 0.95, 0.94}, {0.90, 0.91, 0.89, 0.92, 0.90, 0.91},
       6.6057825907581371, 10.0, 3.0171230226395443e-05},
      {{0.5, 0.6, 0.55, 0.62, 0.58}, {0.52, 0.57, 0.54, 0.60, 0.56, 0.53, 0.58},
       0.54443894005988169, 6.133402537630138, 0.30267662516809768},
  };
  for (const auto& c : cases) {
    TTestResult r = welch_t_one_sided(c.a, c.b, 0.10);
    CHECK(r.t_statistic == doctest::Approx(c.t).epsilon(1e-9));
    CHECK(r.degrees_of_freedom == doctest::Approx(c.df).epsilon(1e-9));
    CHECK(std::abs(r.p_value - c.p) < 1e-6);
    CHECK(r.reject_null == (r.p_value < 0.10));
  }
}

TEST_CASE("welch t-test symmetric and degenerate cases") {
  std::vector<double> a{0.8, 0.85, 0.9};
  TTestResult identical = welch_t_one_sided(a, a, 0.10);
  CHECK(identical.t_statistic == 0.0);
  CHECK(identical.p_value == doctest::Approx(0.5).epsilon(1e-12));
  CHECK_FALSE(identical.reject_null);

  std::vector<double> b{0.7, 0.72, 0.71};
  TTestResult fwd = welch_t_one_sided(a, b, 0.10);
  TTestResult rev = welch_t_one_sided(b, a, 0.10);
  CHECK(fwd.p_value + rev.p_value == doctest::Approx(1.0).epsilon(1e-10));

  CHECK_THROWS_AS(welch_t_one_sided({0.5}, b, 0.10), std::invalid_argument);
  CHECK_THROWS_AS(welch_t_one_sided({0.5, 0.5}, {0.4, 0.4}, 0.10), std::invalid_argument);
}

TEST_CASE("p-values stay in (0,1) and fall as the gap grows") {
  Rng rng(63);
  double prev_p = 1.0;
  for (int step = 0; step < 8; ++step) {
    const double gap = 0.01 * double(step);
    std::vector<double> a, b;
    for (int i = 0; i < 6; ++i) {
      const double noise = 0.01 * double(i % 3);
      a.push_back(0.80 + gap + noise);
      b.push_back(0.80 + noise);
    }
    TTestResult r = welch_t_one_sided(a, b, 0.10);
    CHECK(r.p_value > 0.0);
    CHECK(r.p_value < 1.0);
    if (step > 0) CHECK(r.p_value < prev_p);
    prev_p = r.p_value;
  }
}

TEST_CASE("student t tail agrees with known quantiles") {
  // textbook values: P(T_10 > 1.812) ~ 0.05, P(T_1 > 1) = 0.25
  CHECK(student_t_upper_tail(1.8124611228107335, 10.0) == doctest::Approx(0.05).epsilon(1e-6));
  CHECK(student_t_upper_tail(1.0, 1.0) == doctest::Approx(0.25).epsilon(1e-10));
  CHECK(student_t_upper_tail(0.0, 5.0) == 0.5);
  CHECK(regularized_incomplete_beta(0.0, 2.0, 3.0) == 0.0);
  CHECK(regularized_incomplete_beta(1.0, 2.0, 3.0) == 1.0);
  // I_x(1,1) = x
  CHECK(regularized_incomplete_beta(0.37, 1.0, 1.0) == doctest::Approx(0.37).epsilon(1e-12));
}

TEST_CASE("evaluate_fold scores a fold deterministically") {
  Rng rng(64);
  std::vector<EdgeEvent> events;
  const int n = 20;
  for (int i = 0; i < 70; ++i) {
    int u = int(rng.below(std::uint64_t(n)));
    int w = int(rng.below(std::uint64_t(n - 1)));
    events.push_back(EdgeEvent{u, w < u ? w : w + 1, rng.uniform()});
  }
  TemporalGraph g = build_graph(n, std::move(events), 1.0, "eval");
  SplitPlan plan = make_split(g, 0.5, std::nullopt, 3, {}, 5);
  std::vector<FoldTask> tasks = fold_tasks(plan);
  ModelParams params = init_params(n, {}, 7);
  EvalReport a = evaluate_fold(params, plan.observed, tasks[0]);
  EvalReport b = evaluate_fold(params, plan.observed, tasks[0]);
  CHECK(a.auc == b.auc);
  CHECK(a.n_pos == int(tasks[0].test_positives.size()));
  CHECK(a.confusion.true_positives + a.confusion.false_negatives == a.n_pos);
  CHECK(a.confusion.true_negatives + a.confusion.false_positives == a.n_neg);

  FoldTask empty_neg = tasks[0];
  empty_neg.test_negatives.clear();
  CHECK_THROWS_AS(evaluate_fold(params, plan.observed, empty_neg), std::invalid_argument);
}

TEST_CASE("untrained params score near chance") {
  Rng rng(65);
  std::vector<EdgeEvent> events;
  const int n = 40;
  for (int i = 0; i < 200; ++i) {
    int u = int(rng.below(std::uint64_t(n)));
    int w = int(rng.below(std::uint64_t(n - 1)));
    events.push_back(EdgeEvent{u, w < u ? w : w + 1, rng.uniform()});
  }
  TemporalGraph g = build_graph(n, std::move(events), 1.0, "chance");
  SplitPlan plan = make_split(g, 0.5, std::nullopt, 2, {}, 6);
  std::vector<FoldTask> tasks = fold_tasks(plan);
  int inside_band = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    ModelParams params = init_params(n, {}, seed);
    EvalReport r = evaluate_fold(params, plan.observed, tasks[0]);
    if (r.auc >= 0.2 && r.auc <= 0.8) ++inside_band;
  }
  CHECK(inside_band >= 18);  // random embeddings have no signal
}

TEST_CASE("json renderers emit the decision field") {
  TTestResult r = welch_t_one_sided({0.9, 0.91, 0.92}, {0.8, 0.81, 0.82}, 0.10);
  CHECK(ttest_json(r).find("Reject H0") != std::string::npos);
  EvalReport e;
  e.auc = 0.9;
  e.n_pos = 3;
  e.n_neg = 3;
  CHECK(eval_report_json(e).find("\"auc\"") != std::string::npos);
}
