#include "slnlink/train.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "slnlink/rng.hpp"
#include "slnlink/splits.hpp"

namespace slnlink {

namespace {

// log(1 + e^z) without overflow.
double softplus(double z) { return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))); }

bool all_finite(const Mat& m) { return m.allFinite(); }
bool all_finite(const Vec& v) { return v.allFinite(); }

}  // namespace

LossReport weighted_bce(const std::vector<double>& pos_scores,
                        const std::vector<double>& neg_scores, double pcw) {
  if (pcw <= 0.0) throw std::invalid_argument("pcw must be positive");
  LossReport r;
  for (double s : pos_scores) r.positive_term += softplus(-s);
  r.positive_term *= pcw;
  for (double s : neg_scores) r.negative_term += softplus(s);
  r.total = r.positive_term + r.negative_term;
  return r;
}

Gradients backward(const ModelParams& params, const SnapshotView& snap,
                   const std::vector<Edge>& pos_pairs, const std::vector<Edge>& neg_pairs,
                   double pcw, const ForwardTrace& trace) {
  const int n = snap.num_nodes();

  // d loss / d h2, accumulated over the scored pairs. For a positive pair
  // the score gradient is -pcw * logistic(-s); for a negative, logistic(s).
  Mat dh2 = Mat::Zero(n, trace.h2.cols());
  auto accumulate = [&](const std::vector<Edge>& pairs, bool positive) {
    for (const Edge& p : pairs) {
      const double s = trace.h2.row(p.u).dot(trace.h2.row(p.v));
      const double ds = positive ? -pcw * logistic(-s) : logistic(s);
      dh2.row(p.u) += ds * trace.h2.row(p.v);
      dh2.row(p.v) += ds * trace.h2.row(p.u);
    }
  };
  accumulate(pos_pairs, true);
  accumulate(neg_pairs, false);

  Gradients g;
  Mat dpre2 = params.final_activation
                  ? Mat((trace.pre2.array() > 0.0).cast<double>() * dh2.array())
                  : dh2;
  g.w2 = trace.mean1.transpose() * dpre2;
  g.b2 = dpre2.colwise().sum().transpose();
  Mat dmean1 = dpre2 * params.w2.transpose();
  Mat dh1 = mean_aggregate_adjoint(dmean1, snap);
  Mat dpre1 = (trace.pre1.array() > 0.0).cast<double>() * dh1.array();
  g.w1 = trace.mean0.transpose() * dpre1;
  g.b1 = dpre1.colwise().sum().transpose();
  Mat dmean0 = dpre1 * params.w1.transpose();
  g.embeddings = mean_aggregate_adjoint(dmean0, snap);
  return g;
}

Gradients backward(const ModelParams& params, const SnapshotView& snap,
                   const std::vector<Edge>& pos_pairs, const std::vector<Edge>& neg_pairs,
                   double pcw) {
  return backward(params, snap, pos_pairs, neg_pairs, pcw, forward(params, snap));
}

AdamState make_adam_state(const ModelParams& p) {
  AdamState s;
  s.m_embeddings = Mat::Zero(p.embeddings.rows(), p.embeddings.cols());
  s.v_embeddings = s.m_embeddings;
  s.m_w1 = Mat::Zero(p.w1.rows(), p.w1.cols());
  s.v_w1 = s.m_w1;
  s.m_b1 = Vec::Zero(p.b1.size());
  s.v_b1 = s.m_b1;
  s.m_w2 = Mat::Zero(p.w2.rows(), p.w2.cols());
  s.v_w2 = s.m_w2;
  s.m_b2 = Vec::Zero(p.b2.size());
  s.v_b2 = s.m_b2;
  return s;
}

namespace {

template <typename T>
void adam_update_block(T& theta, const T& grad, T& m, T& v, double lr, double b1, double b2,
                       double eps, double bc1, double bc2) {
  m = b1 * m + (1.0 - b1) * grad;
  v = (b2 * v.array() + (1.0 - b2) * grad.array().square()).matrix();
  theta -= (lr * (m.array() / bc1) / ((v.array() / bc2).sqrt() + eps)).matrix();
}

}  // namespace

void adam_step(ModelParams& params, const Gradients& grads, AdamState& state,
               const TrainConfig& cfg) {
  if (!all_finite(grads.embeddings) || !all_finite(grads.w1) || !all_finite(grads.b1) ||
      !all_finite(grads.w2) || !all_finite(grads.b2)) {
    throw std::runtime_error("non-finite gradient at Adam step " +
                             std::to_string(state.step_count + 1));
  }
  state.step_count += 1;
  const double bc1 = 1.0 - std::pow(cfg.adam_beta1, double(state.step_count));
  const double bc2 = 1.0 - std::pow(cfg.adam_beta2, double(state.step_count));
  adam_update_block(params.embeddings, grads.embeddings, state.m_embeddings, state.v_embeddings,
                    cfg.learning_rate, cfg.adam_beta1, cfg.adam_beta2, cfg.adam_epsilon, bc1, bc2);
  adam_update_block(params.w1, grads.w1, state.m_w1, state.v_w1, cfg.learning_rate, cfg.adam_beta1,
                    cfg.adam_beta2, cfg.adam_epsilon, bc1, bc2);
  adam_update_block(params.b1, grads.b1, state.m_b1, state.v_b1, cfg.learning_rate, cfg.adam_beta1,
                    cfg.adam_beta2, cfg.adam_epsilon, bc1, bc2);
  adam_update_block(params.w2, grads.w2, state.m_w2, state.v_w2, cfg.learning_rate, cfg.adam_beta1,
                    cfg.adam_beta2, cfg.adam_epsilon, bc1, bc2);
  adam_update_block(params.b2, grads.b2, state.m_b2, state.v_b2, cfg.learning_rate, cfg.adam_beta1,
                    cfg.adam_beta2, cfg.adam_epsilon, bc1, bc2);
}

TrainResult train_model(const SnapshotView& snap, const std::vector<Edge>& train_positives,
                        const std::vector<Edge>& forbidden_positives, const TrainConfig& cfg,
                        const ModelDims& dims) {
  if (cfg.epochs < 1) throw std::invalid_argument("epochs must be >= 1");
  if (cfg.learning_rate <= 0.0) throw std::invalid_argument("learning_rate must be positive");
  if (cfg.pcw <= 0.0) throw std::invalid_argument("pcw must be positive");
  if (train_positives.empty()) throw std::invalid_argument("no training positives");

  std::vector<Edge> forbidden = train_positives;
  forbidden.insert(forbidden.end(), forbidden_positives.begin(), forbidden_positives.end());

  TrainResult result;
  result.params = init_params(snap.num_nodes(), dims, mix_seed(cfg.seed, 1));
  AdamState state = make_adam_state(result.params);

  const int neg_count =
      int(std::llround(cfg.train_negative_ratio * double(train_positives.size())));
  std::vector<Edge> negatives;
  result.history.reserve(cfg.epochs);
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    if (epoch == 0 || cfg.resample_negatives_each_epoch) {
      const std::uint64_t neg_seed =
          mix_seed(cfg.seed, 2, cfg.resample_negatives_each_epoch ? std::uint64_t(epoch) : 0);
      negatives = sample_negatives(snap, forbidden, neg_count, neg_seed);
    }
    ForwardTrace trace = forward(result.params, snap);
    PairScores pos = score_pairs(trace, train_positives);
    PairScores neg = score_pairs(trace, negatives);
    LossReport loss = weighted_bce(pos.raw, neg.raw, cfg.pcw);
    loss.epoch = epoch;
    result.history.push_back(loss);
    Gradients grads = backward(result.params, snap, train_positives, negatives, cfg.pcw, trace);
    adam_step(result.params, grads, state, cfg);
  }

  const int window = 100;
  if (int(result.history.size()) > window) {
    const double before = result.history[result.history.size() - 1 - window].total;
    const double after = result.history.back().total;
    if (after >= before) {
      std::ostringstream msg;
      msg << "loss did not decrease over the final " << window << " epochs (" << before << " -> "
          << after << ")";
      result.warnings.push_back(msg.str());
    }
  }
  return result;
}

void save_loss_csv(const std::vector<LossReport>& history, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write loss history: " + path);
  out << "epoch,total,pos,neg\n";
  char buf[128];
  for (const auto& r : history) {
    std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g,%.17g\n", r.epoch, r.total, r.positive_term,
                  r.negative_term);
    out << buf;
  }
}

namespace {

struct CheckInstance {
  TemporalGraph graph;
  SnapshotView snap;
  ModelParams params;
  std::vector<Edge> pos_pairs;
  std::vector<Edge> neg_pairs;
  double pcw = 20.0;
};

CheckInstance make_check_instance(const ModelDims& dims, int graph_size, std::uint64_t seed) {
  Rng rng(mix_seed(seed, 0xC0FFEE));
  std::vector<EdgeEvent> events;
  const int num_events = 2 * graph_size;
  for (int i = 0; i < num_events; ++i) {
    int u = int(rng.below(std::uint64_t(graph_size)));
    int w = int(rng.below(std::uint64_t(graph_size - 1)));
    int v = w < u ? w : w + 1;
    events.push_back(EdgeEvent{u, v, rng.uniform()});
  }
  CheckInstance inst;
  inst.graph = build_graph(graph_size, std::move(events), 1.0, "gradcheck");
  inst.snap = snapshot(inst.graph, 0.6);
  inst.params = init_params(graph_size, dims, mix_seed(seed, 1));
  const int pairs = std::max(2, graph_size / 2);
  for (int i = 0; i < pairs; ++i) {
    int u = int(rng.below(std::uint64_t(graph_size)));
    int w = int(rng.below(std::uint64_t(graph_size - 1)));
    int v = w < u ? w : w + 1;
    inst.pos_pairs.push_back(make_edge(u, v));
    u = int(rng.below(std::uint64_t(graph_size)));
    w = int(rng.below(std::uint64_t(graph_size - 1)));
    v = w < u ? w : w + 1;
    inst.neg_pairs.push_back(make_edge(u, v));
  }
  return inst;
}

double loss_at(const CheckInstance& inst, const ModelParams& params) {
  ForwardTrace trace = forward(params, inst.snap);
  PairScores pos = score_pairs(trace, inst.pos_pairs);
  PairScores neg = score_pairs(trace, inst.neg_pairs);
  return weighted_bce(pos.raw, neg.raw, inst.pcw).total;
}

// Relative error keyed to the larger magnitude, with an absolute floor so
// that finite-difference noise on near-zero gradients does not register.
double rel_error(double analytic, double numeric) {
  return std::abs(analytic - numeric) / std::max(1.0, std::abs(analytic) + std::abs(numeric));
}

}  // namespace

GradCheckReport grad_check(const ModelDims& dims, int graph_size, std::uint64_t seed,
                           double tolerance, bool corrupt_w2) {
  if (graph_size < 2) throw std::invalid_argument("grad_check needs at least 2 nodes");
  if (graph_size > 32) {
    throw std::invalid_argument("graph_size " + std::to_string(graph_size) +
                                " too large for finite differences (max 32)");
  }

  CheckInstance inst = make_check_instance(dims, graph_size, seed);
  ForwardTrace trace = forward(inst.params, inst.snap);
  Gradients analytic =
      backward(inst.params, inst.snap, inst.pos_pairs, inst.neg_pairs, inst.pcw, trace);
  if (corrupt_w2) analytic.w2.array() += 1e-2;

  // Entries whose perturbation could cross a rectifier kink make the
  // two-sided difference unreliable; count and skip them.
  const double kink_band = 1e-6;
  const bool near_kink1 = (trace.pre1.array().abs() < kink_band).any();
  const bool near_kink2 = inst.params.final_activation
                              ? bool((trace.pre2.array().abs() < kink_band).any())
                              : false;

  const double h = 1e-5;
  GradCheckReport report;
  report.tolerance = tolerance;

  auto check_block = [&](const std::string& name, double* data, const double* grad,
                         Eigen::Index count, bool upstream_of_kink) {
    GradCheckBlock block;
    block.name = name;
    for (Eigen::Index i = 0; i < count; ++i) {
      if (upstream_of_kink) {
        ++block.skipped;
        continue;
      }
      const double saved = data[i];
      data[i] = saved + h;
      const double up = loss_at(inst, inst.params);
      data[i] = saved - h;
      const double down = loss_at(inst, inst.params);
      data[i] = saved;
      const double numeric = (up - down) / (2.0 * h);
      block.max_rel_error = std::max(block.max_rel_error, rel_error(grad[i], numeric));
      ++block.checked;
    }
    report.blocks.push_back(block);
  };

  ModelParams& p = inst.params;
  const bool any_kink = near_kink1 || near_kink2;
  check_block("embeddings", p.embeddings.data(), analytic.embeddings.data(),
              p.embeddings.size(), any_kink);
  check_block("W1", p.w1.data(), analytic.w1.data(), p.w1.size(), any_kink);
  check_block("b1", p.b1.data(), analytic.b1.data(), p.b1.size(), any_kink);
  check_block("W2", p.w2.data(), analytic.w2.data(), p.w2.size(), near_kink2);
  check_block("b2", p.b2.data(), analytic.b2.data(), p.b2.size(), near_kink2);

  report.passed = true;
  for (const auto& b : report.blocks) {
    if (b.max_rel_error >= tolerance) report.passed = false;
  }
  return report;
}

std::string grad_check_summary(const GradCheckReport& report) {
  std::ostringstream out;
  char buf[128];
  for (const auto& b : report.blocks) {
    std::snprintf(buf, sizeof(buf), "%-12s max_rel_error=%.3e checked=%d skipped=%d %s\n",
                  b.name.c_str(), b.max_rel_error, b.checked, b.skipped,
                  b.max_rel_error < report.tolerance ? "ok" : "FAIL");
    out << buf;
  }
  out << (report.passed ? "gradient check passed" : "gradient check FAILED") << " (tolerance "
      << report.tolerance << ")\n";
  return out.str();
}

}  // namespace slnlink
