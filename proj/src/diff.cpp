#include "lambdacore/diff.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <unordered_map>
#include <unordered_set>

namespace lambdacore {
namespace diff {

namespace {

std::atomic<uint64_t> g_next_id{1};

std::shared_ptr<Node> make_node(Mat value, std::vector<Parent> parents) {
  auto n = std::make_shared<Node>();
  n->value = std::move(value);
  n->parents = std::move(parents);
  n->id = g_next_id.fetch_add(1);
  for (const auto& p : n->parents)
    if (p.node->requires_grad) n->requires_grad = true;
  return n;
}

// b broadcasts against a if equal shape, [1,cols] row, or [1,1] scalar.
enum class Bcast { kNone, kRow, kScalar };

Bcast bcast_mode(const Mat& a, const Mat& b) {
  if (a.same_shape(b)) return Bcast::kNone;
  if (b.rows == 1 && b.cols == 1) return Bcast::kScalar;
  if (b.rows == 1 && b.cols == a.cols) return Bcast::kRow;
  throw std::invalid_argument("shape mismatch: " + shape_pair(a, b));
}

double bval(const Mat& b, Bcast mode, int r, int c) {
  switch (mode) {
    case Bcast::kNone: return b.at(r, c);
    case Bcast::kRow: return b.at(0, c);
    default: return b.d[0];
  }
}

// Collapse a full-shape gradient back onto a broadcast operand's shape.
Mat reduce_to(const Mat& g, const Mat& like, Bcast mode) {
  if (mode == Bcast::kNone) return g;
  Mat out(like.rows, like.cols);
  for (int r = 0; r < g.rows; ++r)
    for (int c = 0; c < g.cols; ++c) {
      if (mode == Bcast::kScalar)
        out.d[0] += g.at(r, c);
      else
        out.at(0, c) += g.at(r, c);
    }
  return out;
}

Tensor binary_op(const Tensor& a, const Tensor& b, const std::function<double(double, double)>& f,
                 const std::function<double(double, double, double)>& dfa,
                 const std::function<double(double, double, double)>& dfb) {
  const Mat& av = a.value();
  const Mat& bv = b.value();
  Bcast mode = bcast_mode(av, bv);
  Mat out(av.rows, av.cols);
  for (int r = 0; r < av.rows; ++r)
    for (int c = 0; c < av.cols; ++c) out.at(r, c) = f(av.at(r, c), bval(bv, mode, r, c));
  std::vector<Parent> parents;
  parents.push_back({a.node(), [av, bv, mode, dfa](const Mat& g) {
                       Mat ga(av.rows, av.cols);
                       for (int r = 0; r < av.rows; ++r)
                         for (int c = 0; c < av.cols; ++c)
                           ga.at(r, c) = g.at(r, c) * dfa(av.at(r, c), bval(bv, mode, r, c), 0);
                       return ga;
                     }});
  parents.push_back({b.node(), [av, bv, mode, dfb](const Mat& g) {
                       Mat full(av.rows, av.cols);
                       for (int r = 0; r < av.rows; ++r)
                         for (int c = 0; c < av.cols; ++c)
                           full.at(r, c) = g.at(r, c) * dfb(av.at(r, c), bval(bv, mode, r, c), 0);
                       return reduce_to(full, bv, mode);
                     }});
  return Tensor(make_node(std::move(out), std::move(parents)));
}

Tensor unary_op(const Tensor& a, const std::function<double(double)>& f,
                const std::function<double(double, double)>& df /* (x, y) -> dy/dx */) {
  const Mat& av = a.value();
  Mat out(av.rows, av.cols);
  for (size_t i = 0; i < av.size(); ++i) out.d[i] = f(av.d[i]);
  Mat yv = out;
  std::vector<Parent> parents;
  parents.push_back({a.node(), [av, yv, df](const Mat& g) {
                       Mat ga(av.rows, av.cols);
                       for (size_t i = 0; i < av.size(); ++i) ga.d[i] = g.d[i] * df(av.d[i], yv.d[i]);
                       return ga;
                     }});
  return Tensor(make_node(std::move(out), std::move(parents)));
}

double stable_softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }

double stable_sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

Tensor Tensor::constant(Mat value) {
  auto n = make_node(std::move(value), {});
  return Tensor(std::move(n));
}

Tensor Tensor::param(Mat value) {
  auto n = make_node(std::move(value), {});
  n->requires_grad = true;
  n->grad = Mat(n->value.rows, n->value.cols);
  return Tensor(std::move(n));
}

double Tensor::scalar() const {
  if (node_->value.size() != 1) throw std::invalid_argument("Tensor::scalar on shape " + node_->value.shape_str());
  return node_->value.d[0];
}

Tensor add(const Tensor& a, const Tensor& b) {
  return binary_op(
      a, b, [](double x, double y) { return x + y; }, [](double, double, double) { return 1.0; },
      [](double, double, double) { return 1.0; });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  return binary_op(
      a, b, [](double x, double y) { return x - y; }, [](double, double, double) { return 1.0; },
      [](double, double, double) { return -1.0; });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  return binary_op(
      a, b, [](double x, double y) { return x * y; }, [](double, double y, double) { return y; },
      [](double x, double, double) { return x; });
}

Tensor div(const Tensor& a, const Tensor& b) {
  return binary_op(
      a, b, [](double x, double y) { return x / y; }, [](double, double y, double) { return 1.0 / y; },
      [](double x, double y, double) { return -x / (y * y); });
}

Tensor add(const Tensor& a, double c) {
  return unary_op(
      a, [c](double x) { return x + c; }, [](double, double) { return 1.0; });
}

Tensor mul(const Tensor& a, double c) {
  return unary_op(
      a, [c](double x) { return x * c; }, [c](double, double) { return c; });
}

Tensor neg(const Tensor& a) { return mul(a, -1.0); }

Tensor tanh(const Tensor& a) {
  return unary_op(
      a, [](double x) { return std::tanh(x); }, [](double, double y) { return 1.0 - y * y; });
}

Tensor softplus(const Tensor& a) {
  return unary_op(
      a, [](double x) { return stable_softplus(x); }, [](double x, double) { return stable_sigmoid(x); });
}

Tensor exp(const Tensor& a) {
  return unary_op(
      a, [](double x) { return std::exp(x); }, [](double, double y) { return y; });
}

Tensor log(const Tensor& a) {
  return unary_op(
      a, [](double x) { return std::log(x); }, [](double x, double) { return 1.0 / x; });
}

Tensor square(const Tensor& a) {
  return unary_op(
      a, [](double x) { return x * x; }, [](double x, double) { return 2.0 * x; });
}

Tensor relu(const Tensor& a) {
  return unary_op(
      a, [](double x) { return x > 0 ? x : 0.0; }, [](double x, double) { return x > 0 ? 1.0 : 0.0; });
}

Tensor elu(const Tensor& a) {
  return unary_op(
      a, [](double x) { return x > 0 ? x : std::expm1(x); },
      [](double x, double y) { return x > 0 ? 1.0 : y + 1.0; });
}

Tensor sigmoid(const Tensor& a) {
  return unary_op(
      a, [](double x) { return stable_sigmoid(x); }, [](double, double y) { return y * (1.0 - y); });
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  const Mat& av = a.value();
  const Mat& bv = b.value();
  if (av.cols != bv.rows)
    throw std::invalid_argument("matmul inner dimension mismatch: " + shape_pair(av, bv));
  Mat out(av.rows, bv.cols);
  for (int i = 0; i < av.rows; ++i)
    for (int k = 0; k < av.cols; ++k) {
      double x = av.at(i, k);
      if (x == 0.0) continue;
      const double* brow = &bv.d[static_cast<size_t>(k) * bv.cols];
      double* orow = &out.d[static_cast<size_t>(i) * out.cols];
      for (int j = 0; j < bv.cols; ++j) orow[j] += x * brow[j];
    }
  std::vector<Parent> parents;
  parents.push_back({a.node(), [av, bv](const Mat& g) {
                       // ga = g * b^T
                       Mat ga(av.rows, av.cols);
                       for (int i = 0; i < av.rows; ++i)
                         for (int j = 0; j < bv.cols; ++j) {
                           double gv = g.at(i, j);
                           if (gv == 0.0) continue;
                           for (int k = 0; k < av.cols; ++k) ga.at(i, k) += gv * bv.at(k, j);
                         }
                       return ga;
                     }});
  parents.push_back({b.node(), [av, bv](const Mat& g) {
                       // gb = a^T * g
                       Mat gb(bv.rows, bv.cols);
                       for (int i = 0; i < av.rows; ++i)
                         for (int k = 0; k < av.cols; ++k) {
                           double x = av.at(i, k);
                           if (x == 0.0) continue;
                           for (int j = 0; j < g.cols; ++j) gb.at(k, j) += x * g.at(i, j);
                         }
                       return gb;
                     }});
  return Tensor(make_node(std::move(out), std::move(parents)));
}

Tensor sum(const Tensor& a) {
  const Mat& av = a.value();
  double s = 0.0;
  for (double v : av.d) s += v;
  std::vector<Parent> parents;
  parents.push_back({a.node(), [av](const Mat& g) {
                       Mat ga(av.rows, av.cols, g.d[0]);
                       return ga;
                     }});
  return Tensor(make_node(Mat::scalar(s), std::move(parents)));
}

Tensor mean(const Tensor& a) { return mul(sum(a), 1.0 / static_cast<double>(a.value().size())); }

Tensor hcat(const Tensor& a, const Tensor& b) {
  const Mat& av = a.value();
  const Mat& bv = b.value();
  if (av.rows != bv.rows) throw std::invalid_argument("hcat row mismatch: " + shape_pair(av, bv));
  Mat out(av.rows, av.cols + bv.cols);
  for (int r = 0; r < av.rows; ++r) {
    for (int c = 0; c < av.cols; ++c) out.at(r, c) = av.at(r, c);
    for (int c = 0; c < bv.cols; ++c) out.at(r, av.cols + c) = bv.at(r, c);
  }
  int an = av.cols, bn = bv.cols, rows = av.rows;
  std::vector<Parent> parents;
  parents.push_back({a.node(), [rows, an](const Mat& g) {
                       Mat ga(rows, an);
                       for (int r = 0; r < rows; ++r)
                         for (int c = 0; c < an; ++c) ga.at(r, c) = g.at(r, c);
                       return ga;
                     }});
  parents.push_back({b.node(), [rows, an, bn](const Mat& g) {
                       Mat gb(rows, bn);
                       for (int r = 0; r < rows; ++r)
                         for (int c = 0; c < bn; ++c) gb.at(r, c) = g.at(r, an + c);
                       return gb;
                     }});
  return Tensor(make_node(std::move(out), std::move(parents)));
}

Tensor slice_cols(const Tensor& a, int c0, int c1) {
  const Mat& av = a.value();
  if (c0 < 0 || c1 > av.cols || c0 >= c1)
    throw std::invalid_argument("slice_cols out of range on " + av.shape_str());
  Mat out(av.rows, c1 - c0);
  for (int r = 0; r < av.rows; ++r)
    for (int c = c0; c < c1; ++c) out.at(r, c - c0) = av.at(r, c);
  int rows = av.rows, cols = av.cols;
  std::vector<Parent> parents;
  parents.push_back({a.node(), [rows, cols, c0, c1](const Mat& g) {
                       Mat ga(rows, cols);
                       for (int r = 0; r < rows; ++r)
                         for (int c = c0; c < c1; ++c) ga.at(r, c) = g.at(r, c - c0);
                       return ga;
                     }});
  return Tensor(make_node(std::move(out), std::move(parents)));
}

Tensor stop_gradient(const Tensor& x) { return Tensor::constant(x.value()); }

Tensor gaussian_reparam_sample(const Tensor& mean, const Tensor& stddev, Rng& rng) {
  const Mat& sv = stddev.value();
  for (double v : sv.d)
    if (v < 0.0) throw std::invalid_argument("gaussian_reparam_sample: negative stddev");
  Mat eps = rng.normal_mat(mean.rows(), mean.cols());
  Tensor eps_t = Tensor::constant(std::move(eps));
  return add(mean, mul(stddev, eps_t));
}

void backward(const Tensor& loss) {
  if (loss.value().size() != 1)
    throw std::invalid_argument("backward requires scalar loss, got " + loss.value().shape_str());
  // Reverse topological order by iterative DFS; each node visited once.
  std::vector<Node*> order;
  std::unordered_set<Node*> visited;
  std::vector<std::pair<Node*, size_t>> stack;
  stack.emplace_back(loss.node().get(), 0);
  visited.insert(loss.node().get());
  while (!stack.empty()) {
    auto& [n, idx] = stack.back();
    if (idx < n->parents.size()) {
      Node* p = n->parents[idx].node.get();
      ++idx;
      if (p->requires_grad && !visited.count(p)) {
        visited.insert(p);
        stack.emplace_back(p, 0);
      }
    } else {
      order.push_back(n);
      stack.pop_back();
    }
  }
  // Flowing gradients live in a per-call table, so repeated backward calls
  // accumulate cleanly into Node::grad.
  std::unordered_map<Node*, Mat> table;
  table[loss.node().get()] = Mat::scalar(1.0);
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node* n = *it;
    auto found = table.find(n);
    if (found == table.end()) continue;
    const Mat& g = found->second;
    if (n->requires_grad) {
      if (n->grad.size() != n->value.size()) n->grad = Mat(n->value.rows, n->value.cols);
      for (size_t i = 0; i < g.size(); ++i) n->grad.d[i] += g.d[i];
    }
    for (const auto& p : n->parents) {
      if (!p.node->requires_grad) continue;
      Mat contrib = p.vjp(g);
      auto [slot, inserted] = table.try_emplace(p.node.get(), contrib);
      if (!inserted)
        for (size_t i = 0; i < contrib.size(); ++i) slot->second.d[i] += contrib.d[i];
    }
  }
}

}  // namespace diff
}  // namespace lambdacore
