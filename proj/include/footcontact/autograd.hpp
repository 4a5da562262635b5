// Copyright 2026 The footcontact Authors
// SPDX-License-Identifier: Apache-2.0

// Reverse-mode automatic differentiation over dense matrices.
//
// Every value is a 2-D Eigen matrix. Spatial feature grids use the
// "channels x positions" layout: a c x h x w grid is stored as a c x (h*w)
// matrix with positions in row-major (y, x) order, and the node carries
// (height, width) so convolution and resampling ops know the geometry.
// Token sequences use the same layout (d x N), so a linear layer and a 1x1
// convolution are the same op.
//
// Graphs are built eagerly by calling the free functions below and are
// released when the last Var referencing them goes away. backward() seeds
// a scalar root and accumulates into Param::grad through parameter leaves.

#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "footcontact/common.hpp"

namespace footcontact {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<double>;

// Parameter groups used by the gradient-routing contract.
enum class ParamGroup : int {
  kBackbone = 0,
  kAdapters,
  kGround,
  kFusionMain,
  kDecoderMain,
  kFusionStyle,
  kDecoderStyle,
  kMaskDecoder,
};
inline constexpr int kNumParamGroups = 8;

const char* group_name(ParamGroup g);

struct Param {
  std::string name;
  ParamGroup group = ParamGroup::kBackbone;
  Matrix value;
  Matrix grad;
};

namespace ag {

struct Node {
  Matrix value;
  Matrix grad;
  int height = 0;
  int width = 0;
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> parents;
  std::function<void(Node&)> backward_fn;

  void accumulate(const Matrix& g);
};

class Var {
 public:
  Var() = default;
  explicit Var(std::shared_ptr<Node> node) : node_(std::move(node)) {}

  const Matrix& value() const { return node_->value; }
  const Matrix& grad() const { return node_->grad; }
  Eigen::Index rows() const { return node_->value.rows(); }
  Eigen::Index cols() const { return node_->value.cols(); }
  int height() const { return node_->height; }
  int width() const { return node_->width; }
  bool requires_grad() const { return node_->requires_grad; }
  double item() const;
  const std::shared_ptr<Node>& node() const { return node_; }
  explicit operator bool() const { return static_cast<bool>(node_); }

 private:
  std::shared_ptr<Node> node_;
};

// Leaves.
Var constant(Matrix value, int height = 0, int width = 0);
Var variable(Matrix value, int height = 0, int width = 0);
// Leaf bound to a parameter. A trainable leaf adds its gradient into
// param.grad during backward(); a frozen leaf is a constant.
Var param_leaf(Param& param, bool trainable);
Var detach(const Var& x);

// Seeds d(root)/d(root) = 1 for a 1x1 root and propagates. Node gradients
// reachable from root are reset first, so backward() may be called on
// different roots of the same graph.
void backward(const Var& root);

// Spatial metadata.
Var as_grid(const Var& x, int height, int width);

// Elementwise arithmetic (equal shapes).
Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);
Var div(const Var& a, const Var& b);
Var scale(const Var& x, double s);
Var add_scalar(const Var& x, double s);
Var mul_const(const Var& x, const Matrix& m);

// Broadcasts: col vectors (rows x 1) act per row, scalars (1x1) globally.
Var add_col(const Var& x, const Var& col);
Var mul_col(const Var& x, const Var& col);
Var mul_scalar(const Var& x, const Var& s);

Var matmul(const Var& a, const Var& b, bool transpose_a = false,
           bool transpose_b = false);

// Activations.
Var relu(const Var& x);
Var tanh(const Var& x);
Var sigmoid(const Var& x);
Var softplus(const Var& x);
Var gelu(const Var& x);

// Softmax over rows within each column.
Var softmax_cols(const Var& x);
// Normalizes each column over rows, then applies per-row affine.
Var layer_norm_cols(const Var& x, const Var& gamma, const Var& beta,
                    double eps = 1e-5);

// Per-row statistics over columns: mean, and population standard deviation
// clamped below at eps (zero gradient where clamped).
Var row_mean(const Var& x);
Var row_std(const Var& x, double eps);

Var concat_rows(const std::vector<Var>& parts);
Var slice_rows(const Var& x, Eigen::Index start, Eigen::Index count);

// 2-D convolution on a grid. weight: out x (k*k*in), taps major, channels
// minor; k in {1, 3}; 3x3 uses zero padding of one. bias may be empty.
Var conv2d(const Var& x, const Var& weight, const Var& bias, int kernel);

// Linear spatial resampling y = x * op. op maps (h_in*w_in) to
// (h_out*w_out) positions.
Var resample(const Var& x, std::shared_ptr<const SparseMatrix> op,
             int out_height, int out_width);

Var sum_all(const Var& x);
Var mean_all(const Var& x);
// sum(x .* m) -> 1x1.
Var dot_const(const Var& x, const Matrix& m);
// Scales each column to unit Euclidean norm.
Var l2_normalize_cols(const Var& x, double eps = 1e-12);
// Inverted dropout with a mask drawn from rng.
Var dropout(const Var& x, double rate, Rng& rng);

// Losses (scalar 1x1 outputs).
// mean over elements of softplus(z) - y*z, i.e. BCE(sigmoid(z), y).
Var bce_with_logits(const Var& logits, const Matrix& targets);
// 1 - (2 sum(p*g) + smooth) / (sum(p) + sum(g) + smooth), p = sigmoid(z).
Var dice_loss_with_logits(const Var& logits, const Matrix& targets,
                          double smooth = 1.0);
// mean over valid entries of |pred - target|; zero when nothing is valid.
Var masked_mae(const Var& pred, const Matrix& target, const Matrix& valid);

}  // namespace ag
}  // namespace footcontact
