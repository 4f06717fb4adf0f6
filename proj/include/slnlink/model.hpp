#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "slnlink/graph.hpp"

// Two-layer mean-aggregation GraphSAGE encoder with a trainable embedding
// row per node, plus the sigmoid dot-product link decoder. All math is
// 64-bit and fully deterministic: aggregation is over the complete
// neighborhood (plus self) unless the sampled variant is requested.

namespace slnlink {

using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vec = Eigen::VectorXd;

struct ModelDims {
  int embedding = 16;  // F
  int hidden1 = 16;    // d1
  int hidden2 = 16;    // d2
  bool final_activation = true;  // rectifier after the second layer as well
};

struct ModelParams {
  Mat embeddings;  // |V| x F
  Mat w1;          // F x d1
  Vec b1;          // d1
  Mat w2;          // d1 x d2
  Vec b2;          // d2
  bool final_activation = true;

  int num_nodes() const { return int(embeddings.rows()); }
  ModelDims dims() const {
    return ModelDims{int(embeddings.cols()), int(w1.cols()), int(w2.cols()), final_activation};
  }
};

struct ForwardTrace {
  Mat mean0;  // neighborhood means of the input embeddings
  Mat pre1;   // mean0 * w1 + b1
  Mat h1;     // rectified
  Mat mean1;  // neighborhood means of h1
  Mat pre2;   // mean1 * w2 + b2
  Mat h2;     // final node embeddings
};

struct PairScores {
  std::vector<double> raw;    // h2_i . h2_j
  std::vector<double> prob;   // logistic of raw
};

ModelParams init_params(int num_nodes, const ModelDims& dims, std::uint64_t seed);

ForwardTrace forward(const ModelParams& params, const SnapshotView& snap);

// Same computation with each layer's mean taken over a seeded uniform
// sample of at most fanout neighbors (plus self). Opt-in; full
// aggregation is the default everywhere else.
ForwardTrace forward_sampled(const ModelParams& params, const SnapshotView& snap,
                             std::pair<int, int> fanouts, std::uint64_t seed);

PairScores score_pairs(const ForwardTrace& trace, const std::vector<Edge>& pairs);

inline double logistic(double s) {
  return s >= 0.0 ? 1.0 / (1.0 + std::exp(-s)) : std::exp(s) / (1.0 + std::exp(s));
}

// Neighborhood mean of rows of `rows`: out_i = mean over {rows_j : j in N(i) u {i}}.
Mat mean_aggregate(const Mat& rows, const SnapshotView& snap);

// Adjoint of mean_aggregate: distributes each node's upstream gradient
// equally (factor 1/(deg+1)) to itself and its neighbors.
Mat mean_aggregate_adjoint(const Mat& grad, const SnapshotView& snap);

// Checkpoint format: plain text, dimension header then %.17g values, so
// a save/load round trip is bit-exact.
void save_params(const ModelParams& params, const std::string& path);
ModelParams load_params(const std::string& path);

}  // namespace slnlink
