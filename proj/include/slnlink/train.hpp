#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "slnlink/model.hpp"
#include "slnlink/graph.hpp"

// Imbalance-weighted binary cross-entropy, exact reverse-mode gradients
// through the encoder and decoder, Adam, and a finite-difference gradient
// verification harness.

namespace slnlink {

struct TrainConfig {
  int epochs = 1500;
  double learning_rate = 5e-4;
  double pcw = 20.0;  // positive class weight
  double train_negative_ratio = 1.0;
  bool resample_negatives_each_epoch = true;
  std::uint64_t seed = 0;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;
};

struct AdamState {
  Mat m_embeddings, v_embeddings;
  Mat m_w1, v_w1;
  Vec m_b1, v_b1;
  Mat m_w2, v_w2;
  Vec m_b2, v_b2;
  long step_count = 0;
};

AdamState make_adam_state(const ModelParams& params);

struct LossReport {
  int epoch = 0;
  double total = 0.0;
  double positive_term = 0.0;
  double negative_term = 0.0;
};

struct Gradients {
  Mat embeddings;
  Mat w1;
  Vec b1;
  Mat w2;
  Vec b2;
};

// total = pcw * sum log(1+e^-s+) + sum log(1+e^s-), evaluated with the
// stable softplus form.
LossReport weighted_bce(const std::vector<double>& pos_scores,
                        const std::vector<double>& neg_scores, double pcw);

// Exact gradients of weighted_bce with respect to every parameter block.
// The rectifier subgradient at 0 is taken as 0.
Gradients backward(const ModelParams& params, const SnapshotView& snap,
                   const std::vector<Edge>& pos_pairs, const std::vector<Edge>& neg_pairs,
                   double pcw, const ForwardTrace& trace);
Gradients backward(const ModelParams& params, const SnapshotView& snap,
                   const std::vector<Edge>& pos_pairs, const std::vector<Edge>& neg_pairs,
                   double pcw);

// Standard Adam with bias correction; throws on non-finite gradients.
void adam_step(ModelParams& params, const Gradients& grads, AdamState& state,
               const TrainConfig& cfg);

struct TrainResult {
  ModelParams params;
  std::vector<LossReport> history;
  std::vector<std::string> warnings;
};

// Full-graph training. Per epoch: (re)sample negatives at
// train_negative_ratio excluding observed edges and every entry of
// `forbidden_positives` (train and held-out positives alike), forward,
// loss, backward, Adam step. Deterministic for a fixed seed.
TrainResult train_model(const SnapshotView& snap, const std::vector<Edge>& train_positives,
                        const std::vector<Edge>& forbidden_positives, const TrainConfig& cfg,
                        const ModelDims& dims);

void save_loss_csv(const std::vector<LossReport>& history, const std::string& path);

struct GradCheckBlock {
  std::string name;
  double max_rel_error = 0.0;
  int checked = 0;
  int skipped = 0;  // entries near a rectifier kink
};

struct GradCheckReport {
  std::vector<GradCheckBlock> blocks;
  bool passed = false;
  double tolerance = 0.0;
};

// Compares backward against central finite differences (h=1e-5) on a
// seeded random graph with random supervision pairs. graph_size is capped
// at 32: the numeric side costs two forwards per parameter.
// `corrupt_w2` adds 1e-2 to the analytic W2 gradient, for harness tests.
GradCheckReport grad_check(const ModelDims& dims, int graph_size, std::uint64_t seed,
                           double tolerance, bool corrupt_w2 = false);

std::string grad_check_summary(const GradCheckReport& report);

}  // namespace slnlink
