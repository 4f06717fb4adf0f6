#pragma once

#include <string>
#include <vector>

#include "slnlink/model.hpp"
#include "slnlink/splits.hpp"

// AUC computation (pairwise-literal and rank-based), thresholded confusion
// counts, and one-sided Welch t-tests between AUC samples.

namespace slnlink {

enum class TiePolicy {
  kStrict,  // ties between a positive and a negative score count 0
  kHalf,    // ties count 0.5 (standard AUC); the default
};

struct Confusion {
  long long true_positives = 0;
  long long false_positives = 0;
  long long true_negatives = 0;
  long long false_negatives = 0;
};

struct EvalReport {
  double auc = 0.0;
  int n_pos = 0;
  int n_neg = 0;
  Confusion confusion;  // at threshold 0.5 on probabilities
  int fold_index = -1;
};

struct TTestResult {
  double t_statistic = 0.0;
  double degrees_of_freedom = 0.0;
  double p_value = 0.0;
  double alpha = 0.0;
  bool reject_null = false;
};

// Literal mean of the indicator over all positive x negative score pairs.
// O(|P||N|); the rank-based version below is the fast path.
double auc_pairwise(const std::vector<double>& pos_scores, const std::vector<double>& neg_scores,
                    TiePolicy tie_policy);

// Rank-sum AUC with average ranks for ties. Agrees with
// auc_pairwise(kHalf) to within 1e-12.
double auc_rank(const std::vector<double>& pos_scores, const std::vector<double>& neg_scores);

// Predict a link iff prob > threshold (strict, so a probability of exactly
// 0.5 predicts "no link" at the default threshold).
Confusion confusion_at_threshold(const std::vector<double>& pos_probs,
                                 const std::vector<double>& neg_probs, double threshold = 0.5);

// Welch's unequal-variance t statistic with Satterthwaite degrees of
// freedom; alternative hypothesis mean(a) > mean(b). The upper-tail
// probability comes from the regularized incomplete beta function.
TTestResult welch_t_one_sided(const std::vector<double>& sample_a,
                              const std::vector<double>& sample_b, double alpha = 0.10);

EvalReport evaluate_fold(const ModelParams& params, const SnapshotView& snap,
                         const FoldTask& task, TiePolicy tie_policy = TiePolicy::kHalf);
EvalReport evaluate_fold(const ForwardTrace& trace, const FoldTask& task,
                         TiePolicy tie_policy = TiePolicy::kHalf);

// I_x(a,b), continued-fraction evaluation, accurate to ~1e-14.
double regularized_incomplete_beta(double x, double a, double b);

// P(T > t) for Student's t with df degrees of freedom.
double student_t_upper_tail(double t, double df);

std::string ttest_json(const TTestResult& r);
std::string eval_report_json(const EvalReport& r);

}  // namespace slnlink
