#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "lambdacore/mat.hpp"
#include "lambdacore/rng.hpp"

namespace lambdacore {
namespace diff {

struct Node;

// One incoming edge of the differentiation graph: the predecessor node plus
// the vector-Jacobian product mapping this node's out-gradient to the
// predecessor's contribution.
struct Parent {
  std::shared_ptr<Node> node;
  std::function<Mat(const Mat& g)> vjp;
};

struct Node {
  Mat value;
  Mat grad;  // same shape as value once backward has run
  std::vector<Parent> parents;
  bool requires_grad = false;
  uint64_t id = 0;  // creation order, used for deterministic traversal
};

// Handle to a graph node with value semantics on the handle itself.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::shared_ptr<Node> n) : node_(std::move(n)) {}

  static Tensor constant(Mat value);
  static Tensor constant(double value) { return constant(Mat::scalar(value)); }
  // Leaf with requires_grad = true; gradients accumulate into grad().
  static Tensor param(Mat value);

  bool defined() const { return node_ != nullptr; }
  const Mat& value() const { return node_->value; }
  Mat& mutable_value() { return node_->value; }
  const Mat& grad() const { return node_->grad; }
  bool requires_grad() const { return node_->requires_grad; }
  int rows() const { return node_->value.rows; }
  int cols() const { return node_->value.cols; }
  double scalar() const;
  void zero_grad() { node_->grad = Mat(node_->value.rows, node_->value.cols); }
  std::shared_ptr<Node> node() const { return node_; }

 private:
  std::shared_ptr<Node> node_;
};

// Elementwise binary ops. The right operand may broadcast along the leading
// (row) dimension: [1,n] against [B,n], and [1,1] against anything.
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor div(const Tensor& a, const Tensor& b);

Tensor add(const Tensor& a, double c);
Tensor mul(const Tensor& a, double c);
Tensor neg(const Tensor& a);

// Elementwise unary ops.
Tensor tanh(const Tensor& a);
Tensor softplus(const Tensor& a);
Tensor exp(const Tensor& a);
Tensor log(const Tensor& a);
Tensor square(const Tensor& a);
Tensor relu(const Tensor& a);
Tensor elu(const Tensor& a);  // alpha = 1
Tensor sigmoid(const Tensor& a);

Tensor matmul(const Tensor& a, const Tensor& b);

Tensor sum(const Tensor& a);   // -> [1,1]
Tensor mean(const Tensor& a);  // -> [1,1]

// Column concatenation [B,n] ++ [B,m] -> [B,n+m] and its inverse slice.
Tensor hcat(const Tensor& a, const Tensor& b);
Tensor slice_cols(const Tensor& a, int c0, int c1);

// Value-identical node that blocks all gradient flow to its ancestors.
Tensor stop_gradient(const Tensor& x);

// mean + stddev * eps with eps ~ N(0, I); gradient flows through mean and
// stddev only. stddev must be nonnegative elementwise.
Tensor gaussian_reparam_sample(const Tensor& mean, const Tensor& stddev, Rng& rng);

// Reverse pass from a scalar loss. Accumulates d(loss)/d(node) into the grad
// buffer of every reachable requires_grad node; repeated calls accumulate.
void backward(const Tensor& loss);

inline Tensor operator+(const Tensor& a, const Tensor& b) { return add(a, b); }
inline Tensor operator-(const Tensor& a, const Tensor& b) { return sub(a, b); }
inline Tensor operator*(const Tensor& a, const Tensor& b) { return mul(a, b); }
inline Tensor operator/(const Tensor& a, const Tensor& b) { return div(a, b); }
inline Tensor operator+(const Tensor& a, double c) { return add(a, c); }
inline Tensor operator-(const Tensor& a, double c) { return add(a, -c); }
inline Tensor operator*(const Tensor& a, double c) { return mul(a, c); }
inline Tensor operator*(double c, const Tensor& a) { return mul(a, c); }
inline Tensor operator/(const Tensor& a, double c) { return mul(a, 1.0 / c); }
inline Tensor operator-(const Tensor& a) { return neg(a); }

}  // namespace diff
}  // namespace lambdacore
