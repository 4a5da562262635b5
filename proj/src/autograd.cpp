// Copyright 2026 The footcontact Authors
// SPDX-License-Identifier: Apache-2.0

#include "footcontact/autograd.hpp"

#include <cmath>
#include <unordered_set>

namespace footcontact {

const char* group_name(ParamGroup g) {
  switch (g) {
    case ParamGroup::kBackbone: return "backbone";
    case ParamGroup::kAdapters: return "adapters";
    case ParamGroup::kGround: return "ground";
    case ParamGroup::kFusionMain: return "fusion_main";
    case ParamGroup::kDecoderMain: return "decoder_main";
    case ParamGroup::kFusionStyle: return "fusion_style";
    case ParamGroup::kDecoderStyle: return "decoder_style";
    case ParamGroup::kMaskDecoder: return "mask_decoder";
  }
  return "unknown";
}

namespace ag {
namespace {

using NodePtr = std::shared_ptr<Node>;
using BackwardFn = std::function<void(Node&)>;

Var make(Matrix value, std::vector<Var> parents, BackwardFn fn, int h = 0,
         int w = 0) {
  auto node = std::make_shared<Node>();
  node->value = std::move(value);
  node->height = h;
  node->width = w;
  for (const auto& p : parents) {
    if (p.requires_grad()) node->requires_grad = true;
  }
  if (node->requires_grad) {
    node->parents.reserve(parents.size());
    for (const auto& p : parents) node->parents.push_back(p.node());
    node->backward_fn = std::move(fn);
  }
  return Var(std::move(node));
}

// Accumulates into parent i only if it participates in differentiation.
inline void push(Node& self, std::size_t i, const Matrix& g) {
  Node& p = *self.parents[i];
  if (p.requires_grad) p.accumulate(g);
}

inline bool wants(const Node& self, std::size_t i) {
  return self.parents[i]->requires_grad;
}

void check_same_shape(const Var& a, const Var& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw InvalidArgument(std::string(op) + ": shape mismatch (" +
                          std::to_string(a.rows()) + "x" +
                          std::to_string(a.cols()) + " vs " +
                          std::to_string(b.rows()) + "x" +
                          std::to_string(b.cols()) + ")");
  }
}

int grid_h(const Var& a, const Var& b) { return a.height() ? a.height() : b.height(); }
int grid_w(const Var& a, const Var& b) { return a.width() ? a.width() : b.width(); }

}  // namespace

void Node::accumulate(const Matrix& g) {
  if (grad.size() == 0) {
    grad = g;
  } else {
    grad += g;
  }
}

double Var::item() const {
  if (node_->value.size() != 1) {
    throw InvalidArgument("item(): value is not 1x1");
  }
  return node_->value(0, 0);
}

Var constant(Matrix value, int height, int width) {
  auto node = std::make_shared<Node>();
  node->value = std::move(value);
  node->height = height;
  node->width = width;
  return Var(std::move(node));
}

Var variable(Matrix value, int height, int width) {
  auto node = std::make_shared<Node>();
  node->value = std::move(value);
  node->height = height;
  node->width = width;
  node->requires_grad = true;
  return Var(std::move(node));
}

Var param_leaf(Param& param, bool trainable) {
  auto node = std::make_shared<Node>();
  node->value = param.value;
  node->requires_grad = trainable;
  if (trainable) {
    Param* target = &param;
    node->backward_fn = [target](Node& self) {
      if (target->grad.size() == 0) {
        target->grad = self.grad;
      } else {
        target->grad += self.grad;
      }
    };
  }
  return Var(std::move(node));
}

Var detach(const Var& x) { return constant(x.value(), x.height(), x.width()); }

void backward(const Var& root) {
  if (root.value().size() != 1) {
    throw InvalidArgument("backward(): root must be a scalar");
  }
  if (!root.requires_grad()) return;

  // Iterative post-order DFS gives a topological order.
  std::vector<Node*> order;
  std::unordered_set<Node*> seen;
  std::vector<std::pair<Node*, std::size_t>> stack;
  stack.emplace_back(root.node().get(), 0);
  seen.insert(root.node().get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      Node* parent = node->parents[next++].get();
      if (parent->requires_grad && seen.insert(parent).second) {
        stack.emplace_back(parent, 0);
      }
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }
  for (Node* n : order) n->grad.resize(0, 0);
  root.node()->grad = Matrix::Ones(1, 1);
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node* n = *it;
    if (n->grad.size() != 0 && n->backward_fn) n->backward_fn(*n);
  }
}

Var as_grid(const Var& x, int height, int width) {
  if (static_cast<Eigen::Index>(height) * width != x.cols()) {
    throw InvalidArgument("as_grid: height*width does not match columns");
  }
  return make(x.value(), {x}, [](Node& s) { push(s, 0, s.grad); }, height,
              width);
}

Var add(const Var& a, const Var& b) {
  check_same_shape(a, b, "add");
  return make(a.value() + b.value(), {a, b},
              [](Node& s) {
                push(s, 0, s.grad);
                push(s, 1, s.grad);
              },
              grid_h(a, b), grid_w(a, b));
}

Var sub(const Var& a, const Var& b) {
  check_same_shape(a, b, "sub");
  return make(a.value() - b.value(), {a, b},
              [](Node& s) {
                push(s, 0, s.grad);
                if (wants(s, 1)) push(s, 1, -s.grad);
              },
              grid_h(a, b), grid_w(a, b));
}

Var mul(const Var& a, const Var& b) {
  check_same_shape(a, b, "mul");
  return make(a.value().cwiseProduct(b.value()), {a, b},
              [](Node& s) {
                if (wants(s, 0)) push(s, 0, s.grad.cwiseProduct(s.parents[1]->value));
                if (wants(s, 1)) push(s, 1, s.grad.cwiseProduct(s.parents[0]->value));
              },
              grid_h(a, b), grid_w(a, b));
}

Var div(const Var& a, const Var& b) {
  check_same_shape(a, b, "div");
  return make(a.value().cwiseQuotient(b.value()), {a, b},
              [](Node& s) {
                const Matrix& bv = s.parents[1]->value;
                if (wants(s, 0)) push(s, 0, s.grad.cwiseQuotient(bv));
                if (wants(s, 1)) {
                  push(s, 1, -s.grad.cwiseProduct(s.value).cwiseQuotient(bv));
                }
              },
              grid_h(a, b), grid_w(a, b));
}

Var scale(const Var& x, double k) {
  return make(x.value() * k, {x}, [k](Node& s) { push(s, 0, s.grad * k); },
              x.height(), x.width());
}

Var add_scalar(const Var& x, double k) {
  return make(x.value().array() + k, {x}, [](Node& s) { push(s, 0, s.grad); },
              x.height(), x.width());
}

Var mul_const(const Var& x, const Matrix& m) {
  if (m.rows() != x.rows() || m.cols() != x.cols()) {
    throw InvalidArgument("mul_const: shape mismatch");
  }
  return make(x.value().cwiseProduct(m), {x},
              [m](Node& s) { push(s, 0, s.grad.cwiseProduct(m)); }, x.height(),
              x.width());
}

Var add_col(const Var& x, const Var& col) {
  if (col.cols() != 1 || col.rows() != x.rows()) {
    throw InvalidArgument("add_col: expected a " + std::to_string(x.rows()) +
                          "x1 column");
  }
  Matrix y = x.value();
  y.colwise() += col.value().col(0);
  return make(std::move(y), {x, col},
              [](Node& s) {
                push(s, 0, s.grad);
                if (wants(s, 1)) push(s, 1, s.grad.rowwise().sum());
              },
              x.height(), x.width());
}

Var mul_col(const Var& x, const Var& col) {
  if (col.cols() != 1 || col.rows() != x.rows()) {
    throw InvalidArgument("mul_col: expected a " + std::to_string(x.rows()) +
                          "x1 column");
  }
  Matrix y = x.value().array().colwise() * col.value().col(0).array();
  return make(std::move(y), {x, col},
              [](Node& s) {
                const Matrix& xv = s.parents[0]->value;
                const Matrix& cv = s.parents[1]->value;
                if (wants(s, 0)) {
                  Matrix g = s.grad.array().colwise() * cv.col(0).array();
                  push(s, 0, g);
                }
                if (wants(s, 1)) {
                  push(s, 1, s.grad.cwiseProduct(xv).rowwise().sum());
                }
              },
              x.height(), x.width());
}

Var mul_scalar(const Var& x, const Var& k) {
  if (k.value().size() != 1) throw InvalidArgument("mul_scalar: expected 1x1");
  return make(x.value() * k.value()(0, 0), {x, k},
              [](Node& s) {
                const double kv = s.parents[1]->value(0, 0);
                if (wants(s, 0)) push(s, 0, s.grad * kv);
                if (wants(s, 1)) {
                  Matrix g(1, 1);
                  g(0, 0) = s.grad.cwiseProduct(s.parents[0]->value).sum();
                  push(s, 1, g);
                }
              },
              x.height(), x.width());
}

Var matmul(const Var& a, const Var& b, bool ta, bool tb) {
  const Eigen::Index inner_a = ta ? a.rows() : a.cols();
  const Eigen::Index inner_b = tb ? b.cols() : b.rows();
  if (inner_a != inner_b) throw InvalidArgument("matmul: inner dimension mismatch");
  Matrix y;
  if (!ta && !tb) y.noalias() = a.value() * b.value();
  else if (ta && !tb) y.noalias() = a.value().transpose() * b.value();
  else if (!ta && tb) y.noalias() = a.value() * b.value().transpose();
  else y.noalias() = a.value().transpose() * b.value().transpose();
  return make(std::move(y), {a, b}, [ta, tb](Node& s) {
    const Matrix& av = s.parents[0]->value;
    const Matrix& bv = s.parents[1]->value;
    const Matrix& g = s.grad;
    if (wants(s, 0)) {
      Matrix da;
      if (!ta && !tb) da.noalias() = g * bv.transpose();
      else if (ta && !tb) da.noalias() = bv * g.transpose();
      else if (!ta && tb) da.noalias() = g * bv;
      else da.noalias() = bv.transpose() * g.transpose();
      push(s, 0, da);
    }
    if (wants(s, 1)) {
      Matrix db;
      if (!ta && !tb) db.noalias() = av.transpose() * g;
      else if (ta && !tb) db.noalias() = av * g;
      else if (!ta && tb) db.noalias() = g.transpose() * av;
      else db.noalias() = g.transpose() * av.transpose();
      push(s, 1, db);
    }
  });
}

Var relu(const Var& x) {
  return make(x.value().cwiseMax(0.0), {x},
              [](Node& s) {
                const Matrix& xv = s.parents[0]->value;
                push(s, 0, (xv.array() > 0.0).select(s.grad, 0.0));
              },
              x.height(), x.width());
}

Var tanh(const Var& x) {
  return make(x.value().array().tanh().matrix(), {x},
              [](Node& s) {
                push(s, 0, (s.grad.array() * (1.0 - s.value.array().square())).matrix());
              },
              x.height(), x.width());
}

namespace {
inline double stable_sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}
inline double stable_softplus(double z) {
  return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}
}  // namespace

Var sigmoid(const Var& x) {
  return make(x.value().unaryExpr(&stable_sigmoid), {x},
              [](Node& s) {
                push(s, 0, (s.grad.array() * s.value.array() * (1.0 - s.value.array())).matrix());
              },
              x.height(), x.width());
}

Var softplus(const Var& x) {
  return make(x.value().unaryExpr(&stable_softplus), {x},
              [](Node& s) {
                push(s, 0, s.grad.cwiseProduct(s.parents[0]->value.unaryExpr(&stable_sigmoid)));
              },
              x.height(), x.width());
}

namespace {
constexpr double kGeluC = 0.7978845608028654;  // sqrt(2/pi)
inline double gelu_fwd(double v) {
  return 0.5 * v * (1.0 + std::tanh(kGeluC * (v + 0.044715 * v * v * v)));
}
inline double gelu_deriv(double v) {
  const double u = kGeluC * (v + 0.044715 * v * v * v);
  const double t = std::tanh(u);
  const double du = kGeluC * (1.0 + 3.0 * 0.044715 * v * v);
  return 0.5 * (1.0 + t) + 0.5 * v * (1.0 - t * t) * du;
}
}  // namespace

Var gelu(const Var& x) {
  return make(x.value().unaryExpr(&gelu_fwd), {x},
              [](Node& s) {
                push(s, 0, s.grad.cwiseProduct(s.parents[0]->value.unaryExpr(&gelu_deriv)));
              },
              x.height(), x.width());
}

Var softmax_cols(const Var& x) {
  Matrix y = x.value();
  for (Eigen::Index j = 0; j < y.cols(); ++j) {
    auto c = y.col(j);
    c.array() -= c.maxCoeff();
    c = c.array().exp().matrix();
    c /= c.sum();
  }
  return make(std::move(y), {x},
              [](Node& s) {
                const Matrix& yv = s.value;
                Eigen::RowVectorXd dots = s.grad.cwiseProduct(yv).colwise().sum();
                Matrix g = s.grad;
                g.rowwise() -= dots;
                push(s, 0, g.cwiseProduct(yv));
              },
              x.height(), x.width());
}

Var layer_norm_cols(const Var& x, const Var& gamma, const Var& beta, double eps) {
  const Eigen::Index n = x.rows();
  if (gamma.rows() != n || beta.rows() != n) {
    throw InvalidArgument("layer_norm_cols: affine size mismatch");
  }
  const Matrix& xv = x.value();
  Eigen::RowVectorXd mean = xv.colwise().mean();
  Matrix centered = xv.rowwise() - mean;
  Eigen::RowVectorXd inv_std =
      ((centered.array().square().colwise().sum() / static_cast<double>(n)) + eps)
          .rsqrt()
          .matrix();
  Matrix xhat = centered.array().rowwise() * inv_std.array();
  Matrix y = xhat.array().colwise() * gamma.value().col(0).array();
  y.colwise() += beta.value().col(0);
  return make(std::move(y), {x, gamma, beta},
              [xhat = std::move(xhat), inv_std = std::move(inv_std), n](Node& s) {
                const Matrix& g = s.grad;
                if (wants(s, 1)) push(s, 1, g.cwiseProduct(xhat).rowwise().sum());
                if (wants(s, 2)) push(s, 2, g.rowwise().sum());
                if (wants(s, 0)) {
                  Matrix dxhat = g.array().colwise() * s.parents[1]->value.col(0).array();
                  Eigen::RowVectorXd m1 = dxhat.colwise().mean();
                  Eigen::RowVectorXd m2 = dxhat.cwiseProduct(xhat).colwise().mean();
                  Matrix dx = dxhat.rowwise() - m1;
                  dx -= (xhat.array().rowwise() * m2.array()).matrix();
                  dx = dx.array().rowwise() * inv_std.array();
                  push(s, 0, dx);
                }
                (void)n;
              },
              x.height(), x.width());
}

Var row_mean(const Var& x) {
  const double n = static_cast<double>(x.cols());
  return make(x.value().rowwise().mean(), {x}, [n](Node& s) {
    const Eigen::Index cols = s.parents[0]->value.cols();
    push(s, 0, s.grad.col(0).replicate(1, cols) / n);
  });
}

Var row_std(const Var& x, double eps) {
  const double n = static_cast<double>(x.cols());
  Vector mean = x.value().rowwise().mean();
  Matrix centered = x.value().colwise() - mean;
  Vector raw = (centered.array().square().rowwise().sum() / n).sqrt().matrix();
  Vector clamped = raw.cwiseMax(eps);
  Matrix out = clamped;
  return make(std::move(out), {x},
              [centered = std::move(centered), raw, eps, n](Node& s) {
                Vector coef = Vector::Zero(raw.size());
                for (Eigen::Index i = 0; i < raw.size(); ++i) {
                  if (raw(i) >= eps && raw(i) > 0.0) coef(i) = s.grad(i, 0) / (n * raw(i));
                }
                Matrix g = centered.array().colwise() * coef.array();
                push(s, 0, g);
              });
}

Var concat_rows(const std::vector<Var>& parts) {
  if (parts.empty()) throw InvalidArgument("concat_rows: no inputs");
  const Eigen::Index cols = parts.front().cols();
  Eigen::Index rows = 0;
  for (const auto& p : parts) {
    if (p.cols() != cols) throw InvalidArgument("concat_rows: column mismatch");
    rows += p.rows();
  }
  Matrix y(rows, cols);
  std::vector<Eigen::Index> offsets;
  Eigen::Index r = 0;
  for (const auto& p : parts) {
    offsets.push_back(r);
    y.middleRows(r, p.rows()) = p.value();
    r += p.rows();
  }
  return make(std::move(y), parts,
              [offsets](Node& s) {
                for (std::size_t i = 0; i < s.parents.size(); ++i) {
                  if (!wants(s, i)) continue;
                  push(s, i, s.grad.middleRows(offsets[i], s.parents[i]->value.rows()));
                }
              },
              parts.front().height(), parts.front().width());
}

Var slice_rows(const Var& x, Eigen::Index start, Eigen::Index count) {
  if (start < 0 || count < 0 || start + count > x.rows()) {
    throw InvalidArgument("slice_rows: out of range");
  }
  return make(x.value().middleRows(start, count), {x},
              [start, count](Node& s) {
                const Matrix& pv = s.parents[0]->value;
                Matrix g = Matrix::Zero(pv.rows(), pv.cols());
                g.middleRows(start, count) = s.grad;
                push(s, 0, g);
              },
              x.height(), x.width());
}

namespace {

// cols(tap*c + ch, p) = x(ch, p shifted by tap), zero outside.
Matrix im2col3(const Matrix& x, int h, int w) {
  const Eigen::Index c = x.rows();
  Matrix cols = Matrix::Zero(9 * c, static_cast<Eigen::Index>(h) * w);
  for (int tap = 0; tap < 9; ++tap) {
    const int dy = tap / 3 - 1;
    const int dx = tap % 3 - 1;
    for (int i = 0; i < h; ++i) {
      const int si = i + dy;
      if (si < 0 || si >= h) continue;
      for (int j = 0; j < w; ++j) {
        const int sj = j + dx;
        if (sj < 0 || sj >= w) continue;
        cols.block(tap * c, i * w + j, c, 1) = x.col(si * w + sj);
      }
    }
  }
  return cols;
}

Matrix col2im3(const Matrix& cols, Eigen::Index c, int h, int w) {
  Matrix x = Matrix::Zero(c, static_cast<Eigen::Index>(h) * w);
  for (int tap = 0; tap < 9; ++tap) {
    const int dy = tap / 3 - 1;
    const int dx = tap % 3 - 1;
    for (int i = 0; i < h; ++i) {
      const int si = i + dy;
      if (si < 0 || si >= h) continue;
      for (int j = 0; j < w; ++j) {
        const int sj = j + dx;
        if (sj < 0 || sj >= w) continue;
        x.col(si * w + sj) += cols.block(tap * c, i * w + j, c, 1);
      }
    }
  }
  return x;
}

}  // namespace

Var conv2d(const Var& x, const Var& weight, const Var& bias, int kernel) {
  const int h = x.height();
  const int w = x.width();
  if (h <= 0 || w <= 0) throw InvalidArgument("conv2d: input has no grid shape");
  if (kernel != 1 && kernel != 3) throw InvalidArgument("conv2d: kernel must be 1 or 3");
  const Eigen::Index c = x.rows();
  if (weight.cols() != kernel * kernel * c) {
    throw InvalidArgument("conv2d: weight expects " +
                          std::to_string(weight.cols() / (kernel * kernel)) +
                          " input channels, got " + std::to_string(c));
  }
  const bool has_bias = static_cast<bool>(bias);
  if (has_bias && (bias.rows() != weight.rows() || bias.cols() != 1)) {
    throw InvalidArgument("conv2d: bias shape mismatch");
  }
  Matrix y;
  Matrix cols;
  if (kernel == 1) {
    y.noalias() = weight.value() * x.value();
  } else {
    cols = im2col3(x.value(), h, w);
    y.noalias() = weight.value() * cols;
  }
  if (has_bias) y.colwise() += bias.value().col(0);
  std::vector<Var> parents{x, weight};
  if (has_bias) parents.push_back(bias);
  return make(std::move(y), parents,
              [cols = std::move(cols), kernel, has_bias, c, h, w](Node& s) {
                const Matrix& g = s.grad;
                const Matrix& wv = s.parents[1]->value;
                const Matrix& in = kernel == 1 ? s.parents[0]->value : cols;
                if (wants(s, 1)) {
                  Matrix dw;
                  dw.noalias() = g * in.transpose();
                  push(s, 1, dw);
                }
                if (has_bias && wants(s, 2)) push(s, 2, g.rowwise().sum());
                if (wants(s, 0)) {
                  Matrix dcols;
                  dcols.noalias() = wv.transpose() * g;
                  if (kernel == 1) {
                    push(s, 0, dcols);
                  } else {
                    push(s, 0, col2im3(dcols, c, h, w));
                  }
                }
              },
              h, w);
}

Var resample(const Var& x, std::shared_ptr<const SparseMatrix> op, int out_height,
             int out_width) {
  if (op->rows() != x.cols() ||
      op->cols() != static_cast<Eigen::Index>(out_height) * out_width) {
    throw InvalidArgument("resample: operator shape mismatch");
  }
  Matrix y = x.value() * (*op);
  return make(std::move(y), {x},
              [op](Node& s) {
                Matrix g = s.grad * op->transpose();
                push(s, 0, g);
              },
              out_height, out_width);
}

Var sum_all(const Var& x) {
  Matrix y(1, 1);
  y(0, 0) = x.value().sum();
  return make(std::move(y), {x}, [](Node& s) {
    const Matrix& pv = s.parents[0]->value;
    push(s, 0, Matrix::Constant(pv.rows(), pv.cols(), s.grad(0, 0)));
  });
}

Var mean_all(const Var& x) {
  const double n = static_cast<double>(x.value().size());
  return scale(sum_all(x), 1.0 / n);
}

Var dot_const(const Var& x, const Matrix& m) {
  if (m.rows() != x.rows() || m.cols() != x.cols()) {
    throw InvalidArgument("dot_const: shape mismatch");
  }
  Matrix y(1, 1);
  y(0, 0) = x.value().cwiseProduct(m).sum();
  return make(std::move(y), {x}, [m](Node& s) { push(s, 0, m * s.grad(0, 0)); });
}

Var l2_normalize_cols(const Var& x, double eps) {
  Eigen::RowVectorXd norms = x.value().colwise().norm().cwiseMax(eps);
  Matrix y = x.value().array().rowwise() / norms.array();
  return make(std::move(y), {x},
              [norms](Node& s) {
                const Matrix& yv = s.value;
                Eigen::RowVectorXd dots = s.grad.cwiseProduct(yv).colwise().sum();
                Matrix g = s.grad - (yv.array().rowwise() * dots.array()).matrix();
                g = g.array().rowwise() / norms.array();
                push(s, 0, g);
              },
              x.height(), x.width());
}

Var dropout(const Var& x, double rate, Rng& rng) {
  if (rate <= 0.0) return x;
  if (rate >= 1.0) throw InvalidArgument("dropout: rate must be < 1");
  std::bernoulli_distribution keep(1.0 - rate);
  Matrix m(x.rows(), x.cols());
  const double inv = 1.0 / (1.0 - rate);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = keep(rng) ? inv : 0.0;
  return mul_const(x, m);
}

Var bce_with_logits(const Var& logits, const Matrix& targets) {
  if (targets.rows() != logits.rows() || targets.cols() != logits.cols()) {
    throw InvalidArgument("bce_with_logits: target shape mismatch");
  }
  const Matrix& z = logits.value();
  const double n = static_cast<double>(z.size());
  Matrix y(1, 1);
  y(0, 0) = (z.unaryExpr(&stable_softplus) - targets.cwiseProduct(z)).sum() / n;
  return make(std::move(y), {logits}, [targets, n](Node& s) {
    const Matrix& zv = s.parents[0]->value;
    Matrix g = (zv.unaryExpr(&stable_sigmoid) - targets) * (s.grad(0, 0) / n);
    push(s, 0, g);
  });
}

Var dice_loss_with_logits(const Var& logits, const Matrix& targets, double smooth) {
  if (targets.rows() != logits.rows() || targets.cols() != logits.cols()) {
    throw InvalidArgument("dice_loss_with_logits: target shape mismatch");
  }
  Matrix p = logits.value().unaryExpr(&stable_sigmoid);
  const double inter = p.cwiseProduct(targets).sum();
  const double denom = p.sum() + targets.sum() + smooth;
  Matrix y(1, 1);
  y(0, 0) = 1.0 - (2.0 * inter + smooth) / denom;
  return make(std::move(y), {logits},
              [p = std::move(p), targets, inter, denom, smooth](Node& s) {
                const double num = 2.0 * inter + smooth;
                // dL/dp = -(2 g denom - num) / denom^2
                Matrix dp = (targets * (2.0 * denom)).array() - num;
                dp *= -s.grad(0, 0) / (denom * denom);
                Matrix g = dp.array() * p.array() * (1.0 - p.array());
                push(s, 0, g);
              });
}

Var masked_mae(const Var& pred, const Matrix& target, const Matrix& valid) {
  if (target.rows() != pred.rows() || target.cols() != pred.cols() ||
      valid.rows() != pred.rows() || valid.cols() != pred.cols()) {
    throw InvalidArgument("masked_mae: shape mismatch");
  }
  const double n = valid.sum();
  Matrix diff = pred.value() - target;
  Matrix y(1, 1);
  y(0, 0) = n > 0 ? diff.cwiseAbs().cwiseProduct(valid).sum() / n : 0.0;
  return make(std::move(y), {pred}, [diff, valid, n](Node& s) {
    if (n <= 0) return;
    Matrix sign = diff.unaryExpr([](double v) { return v > 0 ? 1.0 : (v < 0 ? -1.0 : 0.0); });
    push(s, 0, sign.cwiseProduct(valid) * (s.grad(0, 0) / n));
  });
}

}  // namespace ag
}  // namespace footcontact
