#pragma once

// Batched forward pass carrying first- and second-order input tangents, and the matching reverse
// pass that returns parameter gradients of any loss written in terms of Y, ∂Y/∂t and ∂²Y/∂t².

#include <utility>
#include <vector>

#include "meso/nn/dense_net.hpp"

namespace meso::nn::detail {

/// Upper-triangle index pairs (k ≤ q) in row order.
std::vector<std::pair<int, int>> upper_pairs(int m);

struct Tape {
  int order = 0;
  int m = 0;
  Eigen::Index batch = 0;
  std::vector<Eigen::MatrixXd> A;  // A[l]: input of layer l, A[0] = T
  std::vector<Eigen::MatrixXd> Z;  // hidden pre-activations
  std::vector<std::vector<Eigen::MatrixXd>> dA, dZ;   // [layer][k]; dA[0] is implicit (unit rows)
  std::vector<std::vector<Eigen::MatrixXd>> ddA, ddZ; // [layer][pair]; ddA[0] is implicit zero
  Eigen::RowVectorXd Y;
  std::vector<Eigen::RowVectorXd> G;  // [k]
  std::vector<Eigen::RowVectorXd> H;  // [pair]
};

/// T is m × B (already transformed inputs). order 0: Y; 1: also G; 2: also H.
void run_forward(const DenseNet& net, const Eigen::MatrixXd& T, int order, Tape& tape);

struct ParamGrad {
  std::vector<Eigen::MatrixXd> dW;
  std::vector<Eigen::VectorXd> db;
  void reset(const NetParameters& p);
  Eigen::VectorXd flatten() const;
};

/// Adjoints are per-sample row vectors; Gbar / Hbar may be empty when the loss ignores them.
/// Hbar[p] must already fold both symmetric entries of an off-diagonal pair.
void run_backward(const DenseNet& net, const Tape& tape, const Eigen::RowVectorXd& Ybar,
                  const std::vector<Eigen::RowVectorXd>& Gbar, const std::vector<Eigen::RowVectorXd>& Hbar,
                  ParamGrad& grad);

/// Transformed inputs, per-sample Jacobians (m × d) and, when requested, per-sample component
/// Hessians (only for curved components). Without a transform T = X and J is empty.
struct TransformedBatch {
  Eigen::MatrixXd T;
  std::vector<Eigen::MatrixXd> J;
  std::vector<std::vector<Eigen::MatrixXd>> Hc;  // [sample][component], empty matrices for flat ones
};
TransformedBatch transform_batch(const DenseNet& net, const Eigen::MatrixXd& X, bool need_jacobian, bool need_hessians);

}  // namespace meso::nn::detail
