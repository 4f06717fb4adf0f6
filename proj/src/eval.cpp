#include "slnlink/eval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace slnlink {

double auc_pairwise(const std::vector<double>& pos_scores, const std::vector<double>& neg_scores,
                    TiePolicy tie_policy) {
  if (pos_scores.empty() || neg_scores.empty()) {
    throw std::invalid_argument("AUC undefined: need at least one positive and one negative score");
  }
  double wins = 0.0;
  for (double sp : pos_scores) {
    for (double sn : neg_scores) {
      if (sp > sn) {
        wins += 1.0;
      } else if (sp == sn && tie_policy == TiePolicy::kHalf) {
        wins += 0.5;
      }
    }
  }
  return wins / (double(pos_scores.size()) * double(neg_scores.size()));
}

double auc_rank(const std::vector<double>& pos_scores, const std::vector<double>& neg_scores) {
  if (pos_scores.empty() || neg_scores.empty()) {
    throw std::invalid_argument("AUC undefined: need at least one positive and one negative score");
  }
  const std::size_t np = pos_scores.size();
  const std::size_t nn = neg_scores.size();
  std::vector<std::pair<double, bool>> all;  // (score, is_positive)
  all.reserve(np + nn);
  for (double s : pos_scores) all.emplace_back(s, true);
  for (double s : neg_scores) all.emplace_back(s, false);
  std::sort(all.begin(), all.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });

  // Average ranks within tie groups; accumulate the positive rank sum.
  double pos_rank_sum = 0.0;
  std::size_t i = 0;
  while (i < all.size()) {
    std::size_t j = i;
    while (j < all.size() && all[j].first == all[i].first) ++j;
    const double avg_rank = 0.5 * (double(i + 1) + double(j));  // ranks are 1-based
    for (std::size_t k = i; k < j; ++k) {
      if (all[k].second) pos_rank_sum += avg_rank;
    }
    i = j;
  }
  const double u = pos_rank_sum - double(np) * double(np + 1) / 2.0;
  return u / (double(np) * double(nn));
}

Confusion confusion_at_threshold(const std::vector<double>& pos_probs,
                                 const std::vector<double>& neg_probs, double threshold) {
  Confusion c;
  for (double p : pos_probs) {
    if (p > threshold) {
      ++c.true_positives;
    } else {
      ++c.false_negatives;
    }
  }
  for (double p : neg_probs) {
    if (p > threshold) {
      ++c.false_positives;
    } else {
      ++c.true_negatives;
    }
  }
  return c;
}

namespace {

double log_beta(double a, double b) { return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b); }

// Continued fraction for the incomplete beta function (modified Lentz).
double incomplete_beta_cf(double x, double a, double b) {
  const double tiny = 1e-300;
  const double eps = 1e-15;
  double c = 1.0;
  double d = 1.0 - (a + b) * x / (a + 1.0);
  if (std::abs(d) < tiny) d = tiny;
  d = 1.0 / d;
  double result = d;
  for (int m = 1; m <= 300; ++m) {
    const double md = double(m);
    // even term
    double numer = md * (b - md) * x / ((a + 2.0 * md - 1.0) * (a + 2.0 * md));
    d = 1.0 + numer * d;
    if (std::abs(d) < tiny) d = tiny;
    c = 1.0 + numer / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    result *= d * c;
    // odd term
    numer = -(a + md) * (a + b + md) * x / ((a + 2.0 * md) * (a + 2.0 * md + 1.0));
    d = 1.0 + numer * d;
    if (std::abs(d) < tiny) d = tiny;
    c = 1.0 + numer / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    result *= delta;
    if (std::abs(delta - 1.0) < eps) break;
  }
  return result;
}

}  // namespace

double regularized_incomplete_beta(double x, double a, double b) {
  if (!(a > 0.0 && b > 0.0)) throw std::invalid_argument("beta parameters must be positive");
  if (!(x >= 0.0 && x <= 1.0)) throw std::invalid_argument("beta argument outside [0,1]");
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  const double front = std::exp(a * std::log(x) + b * std::log1p(-x) - log_beta(a, b));
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return front * incomplete_beta_cf(x, a, b) / a;
  }
  return 1.0 - std::exp(b * std::log1p(-x) + a * std::log(x) - log_beta(a, b)) *
                   incomplete_beta_cf(1.0 - x, b, a) / b;
}

double student_t_upper_tail(double t, double df) {
  if (!(df > 0.0)) throw std::invalid_argument("degrees of freedom must be positive");
  if (t == 0.0) return 0.5;
  const double half_tail = 0.5 * regularized_incomplete_beta(df / (t * t + df), 0.5 * df, 0.5);
  return t > 0.0 ? half_tail : 1.0 - half_tail;
}

TTestResult welch_t_one_sided(const std::vector<double>& sample_a,
                              const std::vector<double>& sample_b, double alpha) {
  if (sample_a.size() < 2 || sample_b.size() < 2) {
    throw std::invalid_argument("t-test needs at least 2 values per sample");
  }
  const double na = double(sample_a.size());
  const double nb = double(sample_b.size());
  const double ma = std::accumulate(sample_a.begin(), sample_a.end(), 0.0) / na;
  const double mb = std::accumulate(sample_b.begin(), sample_b.end(), 0.0) / nb;
  double va = 0.0, vb = 0.0;
  for (double x : sample_a) va += (x - ma) * (x - ma);
  for (double x : sample_b) vb += (x - mb) * (x - mb);
  va /= (na - 1.0);
  vb /= (nb - 1.0);
  if (va == 0.0 && vb == 0.0) {
    throw std::invalid_argument("t-test undefined: both samples have zero variance");
  }
  const double sa = va / na;
  const double sb = vb / nb;
  TTestResult r;
  r.alpha = alpha;
  r.t_statistic = (ma - mb) / std::sqrt(sa + sb);
  r.degrees_of_freedom =
      (sa + sb) * (sa + sb) / (sa * sa / (na - 1.0) + sb * sb / (nb - 1.0));
  r.p_value = student_t_upper_tail(r.t_statistic, r.degrees_of_freedom);
  r.reject_null = r.p_value < alpha;
  return r;
}

EvalReport evaluate_fold(const ForwardTrace& trace, const FoldTask& task, TiePolicy tie_policy) {
  if (task.test_positives.empty() || task.test_negatives.empty()) {
    throw std::invalid_argument("fold " + std::to_string(task.fold_index) +
                                ": empty test positives or negatives");
  }
  PairScores pos = score_pairs(trace, task.test_positives);
  PairScores neg = score_pairs(trace, task.test_negatives);
  EvalReport report;
  report.fold_index = task.fold_index;
  report.n_pos = int(pos.raw.size());
  report.n_neg = int(neg.raw.size());
  report.auc = tie_policy == TiePolicy::kHalf ? auc_rank(pos.raw, neg.raw)
                                              : auc_pairwise(pos.raw, neg.raw, tie_policy);
  report.confusion = confusion_at_threshold(pos.prob, neg.prob);
  return report;
}

EvalReport evaluate_fold(const ModelParams& params, const SnapshotView& snap,
                         const FoldTask& task, TiePolicy tie_policy) {
  return evaluate_fold(forward(params, snap), task, tie_policy);
}

std::string ttest_json(const TTestResult& r) {
  nlohmann::ordered_json j;
  j["t_statistic"] = r.t_statistic;
  j["degrees_of_freedom"] = r.degrees_of_freedom;
  j["p_value"] = r.p_value;
  j["alpha"] = r.alpha;
  j["decision"] = r.reject_null ? "Reject H0" : "Fail to Reject H0";
  return j.dump(2) + "\n";
}

std::string eval_report_json(const EvalReport& r) {
  nlohmann::ordered_json j;
  if (r.fold_index >= 0) j["fold"] = r.fold_index;
  j["auc"] = r.auc;
  j["n_pos"] = r.n_pos;
  j["n_neg"] = r.n_neg;
  j["confusion"] = {{"tp", r.confusion.true_positives},
                    {"fp", r.confusion.false_positives},
                    {"tn", r.confusion.true_negatives},
                    {"fn", r.confusion.false_negatives}};
  return j.dump(2) + "\n";
}

}  // namespace slnlink
