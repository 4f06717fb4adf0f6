#include "slnlink/model.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "slnlink/rng.hpp"

namespace slnlink {

namespace {

void fill_uniform(Mat& m, double bound, Rng& rng) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      m(i, j) = rng.uniform(-bound, bound);
    }
  }
}

void check_dims(const ModelParams& p, const SnapshotView& snap) {
  if (p.num_nodes() != snap.num_nodes()) {
    throw std::invalid_argument("snapshot has " + std::to_string(snap.num_nodes()) +
                                " nodes but params have " + std::to_string(p.num_nodes()) +
                                " embedding rows");
  }
  if (p.w1.rows() != p.embeddings.cols() || p.w2.rows() != p.w1.cols() ||
      p.b1.size() != p.w1.cols() || p.b2.size() != p.w2.cols()) {
    throw std::invalid_argument("inconsistent parameter dimensions");
  }
}

}  // namespace

ModelParams init_params(int num_nodes, const ModelDims& dims, std::uint64_t seed) {
  if (num_nodes < 1) throw std::invalid_argument("init_params: need at least one node");
  if (dims.embedding < 1 || dims.hidden1 < 1 || dims.hidden2 < 1) {
    throw std::invalid_argument("init_params: dimensions must be >= 1");
  }
  Rng rng(seed);
  ModelParams p;
  p.final_activation = dims.final_activation;
  p.embeddings.resize(num_nodes, dims.embedding);
  fill_uniform(p.embeddings, 1.0 / std::sqrt(double(dims.embedding)), rng);
  p.w1.resize(dims.embedding, dims.hidden1);
  fill_uniform(p.w1, 1.0 / std::sqrt(double(dims.embedding)), rng);
  p.b1 = Vec::Zero(dims.hidden1);
  p.w2.resize(dims.hidden1, dims.hidden2);
  fill_uniform(p.w2, 1.0 / std::sqrt(double(dims.hidden1)), rng);
  p.b2 = Vec::Zero(dims.hidden2);
  return p;
}

Mat mean_aggregate(const Mat& rows, const SnapshotView& snap) {
  Mat out = rows;
  for (const Edge& e : snap.edges) {
    out.row(e.u) += rows.row(e.v);
    out.row(e.v) += rows.row(e.u);
  }
  for (int i = 0; i < snap.num_nodes(); ++i) out.row(i) /= double(snap.degree(i) + 1);
  return out;
}

Mat mean_aggregate_adjoint(const Mat& grad, const SnapshotView& snap) {
  Mat scaled = grad;
  for (int i = 0; i < snap.num_nodes(); ++i) scaled.row(i) /= double(snap.degree(i) + 1);
  Mat out = scaled;
  for (const Edge& e : snap.edges) {
    out.row(e.u) += scaled.row(e.v);
    out.row(e.v) += scaled.row(e.u);
  }
  return out;
}

ForwardTrace forward(const ModelParams& params, const SnapshotView& snap) {
  check_dims(params, snap);
  ForwardTrace t;
  t.mean0 = mean_aggregate(params.embeddings, snap);
  t.pre1 = (t.mean0 * params.w1).rowwise() + params.b1.transpose();
  t.h1 = t.pre1.cwiseMax(0.0);
  t.mean1 = mean_aggregate(t.h1, snap);
  t.pre2 = (t.mean1 * params.w2).rowwise() + params.b2.transpose();
  t.h2 = params.final_activation ? t.pre2.cwiseMax(0.0) : t.pre2;
  return t;
}

namespace {

Mat mean_aggregate_sampled(const Mat& rows, const SnapshotView& snap, int fanout, Rng& rng) {
  Mat out(rows.rows(), rows.cols());
  std::vector<int> picked;
  for (int i = 0; i < snap.num_nodes(); ++i) {
    const auto& ns = snap.neighbors[i];
    Eigen::RowVectorXd acc = rows.row(i);
    int count = 1;
    if (int(ns.size()) <= fanout) {
      for (int j : ns) acc += rows.row(j);
      count += int(ns.size());
    } else {
      picked.assign(ns.begin(), ns.end());
      // Partial Fisher-Yates: the first `fanout` entries are a uniform sample.
      for (int k = 0; k < fanout; ++k) {
        std::size_t j = k + std::size_t(rng.below(picked.size() - k));
        std::swap(picked[k], picked[j]);
        acc += rows.row(picked[k]);
      }
      count += fanout;
    }
    out.row(i) = acc / double(count);
  }
  return out;
}

}  // namespace

ForwardTrace forward_sampled(const ModelParams& params, const SnapshotView& snap,
                             std::pair<int, int> fanouts, std::uint64_t seed) {
  check_dims(params, snap);
  if (fanouts.first < 1 || fanouts.second < 1) {
    throw std::invalid_argument("fanouts must be >= 1");
  }
  Rng rng(seed);
  ForwardTrace t;
  t.mean0 = mean_aggregate_sampled(params.embeddings, snap, fanouts.first, rng);
  t.pre1 = (t.mean0 * params.w1).rowwise() + params.b1.transpose();
  t.h1 = t.pre1.cwiseMax(0.0);
  t.mean1 = mean_aggregate_sampled(t.h1, snap, fanouts.second, rng);
  t.pre2 = (t.mean1 * params.w2).rowwise() + params.b2.transpose();
  t.h2 = params.final_activation ? t.pre2.cwiseMax(0.0) : t.pre2;
  return t;
}

PairScores score_pairs(const ForwardTrace& trace, const std::vector<Edge>& pairs) {
  PairScores s;
  s.raw.reserve(pairs.size());
  s.prob.reserve(pairs.size());
  const int n = int(trace.h2.rows());
  for (const Edge& p : pairs) {
    if (p.u < 0 || p.v < 0 || p.u >= n || p.v >= n) {
      throw std::invalid_argument("score_pairs: pair (" + std::to_string(p.u) + "," +
                                  std::to_string(p.v) + ") out of range");
    }
    double raw = trace.h2.row(p.u).dot(trace.h2.row(p.v));
    s.raw.push_back(raw);
    s.prob.push_back(logistic(raw));
  }
  return s;
}

namespace {

void write_matrix(std::ofstream& out, const Mat& m) {
  char buf[40];
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g", m(i, j));
      out << buf << (j + 1 < m.cols() ? " " : "\n");
    }
  }
}

Mat read_matrix(std::ifstream& in, Eigen::Index rows, Eigen::Index cols) {
  Mat m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) {
      if (!(in >> m(i, j))) throw std::runtime_error("checkpoint truncated");
    }
  }
  return m;
}

}  // namespace

void save_params(const ModelParams& params, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write checkpoint: " + path);
  ModelDims d = params.dims();
  out << "slnlink-checkpoint 1\n";
  out << params.num_nodes() << ' ' << d.embedding << ' ' << d.hidden1 << ' ' << d.hidden2 << ' '
      << (d.final_activation ? 1 : 0) << '\n';
  write_matrix(out, params.embeddings);
  write_matrix(out, params.w1);
  write_matrix(out, Mat(params.b1.transpose()));
  write_matrix(out, params.w2);
  write_matrix(out, Mat(params.b2.transpose()));
  if (!out) throw std::runtime_error("write failed: " + path);
}

ModelParams load_params(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
  std::string magic;
  int version = 0;
  in >> magic >> version;
  if (magic != "slnlink-checkpoint" || version != 1) {
    throw std::runtime_error(path + ": not a slnlink checkpoint");
  }
  int nodes = 0, f = 0, d1 = 0, d2 = 0, final_act = 0;
  if (!(in >> nodes >> f >> d1 >> d2 >> final_act)) {
    throw std::runtime_error(path + ": bad checkpoint header");
  }
  ModelParams p;
  p.final_activation = final_act != 0;
  p.embeddings = read_matrix(in, nodes, f);
  p.w1 = read_matrix(in, f, d1);
  p.b1 = read_matrix(in, 1, d1).row(0).transpose();
  p.w2 = read_matrix(in, d1, d2);
  p.b2 = read_matrix(in, 1, d2).row(0).transpose();
  return p;
}

}  // namespace slnlink
