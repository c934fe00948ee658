#include "lambdacore/nn.hpp"

#include <cmath>
#include <stdexcept>

namespace lambdacore {
namespace nn {

Mlp::Mlp(const std::vector<int>& sizes, Rng& rng, bool zero_init_head) {
  if (sizes.size() < 2) throw std::invalid_argument("Mlp needs at least in/out sizes");
  in_dim_ = sizes.front();
  out_dim_ = sizes.back();
  for (size_t i = 0; i + 1 < sizes.size(); ++i) {
    int in = sizes[i], out = sizes[i + 1];
    bool last = (i + 2 == sizes.size());
    Mat w(in, out);
    if (!(last && zero_init_head)) {
      double bound = std::sqrt(6.0 / (in + out));
      for (auto& v : w.d) v = rng.uniform(-bound, bound);
    }
    layers_.push_back({Tensor::param(std::move(w)), Tensor::param(Mat(1, out))});
  }
}

Tensor Mlp::forward(const Tensor& x) const {
  if (x.cols() != in_dim_)
    throw std::invalid_argument("Mlp::forward input width " + std::to_string(x.cols()) +
                                ", expected " + std::to_string(in_dim_));
  Tensor h = x;
  for (size_t i = 0; i < layers_.size(); ++i) {
    h = diff::add(diff::matmul(h, layers_[i].w), layers_[i].b);
    if (i + 1 < layers_.size()) h = diff::elu(h);
  }
  return h;
}

std::vector<Tensor> Mlp::params() const {
  std::vector<Tensor> out;
  for (const auto& l : layers_) {
    out.push_back(l.w);
    out.push_back(l.b);
  }
  return out;
}

std::vector<double> Mlp::to_flat() const { return flatten_params(params()); }

void Mlp::from_flat(const std::vector<double>& flat, size_t& offset) {
  for (const auto& l : layers_) {
    for (auto& v : l.w.node()->value.d) v = flat.at(offset++);
    for (auto& v : l.b.node()->value.d) v = flat.at(offset++);
  }
}

size_t Mlp::n_params() const {
  size_t n = 0;
  for (const auto& l : layers_) n += l.w.value().size() + l.b.value().size();
  return n;
}

Mlp Mlp::clone() const {
  Mlp c;
  c.in_dim_ = in_dim_;
  c.out_dim_ = out_dim_;
  for (const auto& l : layers_)
    c.layers_.push_back({Tensor::param(l.w.value()), Tensor::param(l.b.value())});
  return c;
}

void Mlp::copy_values_from(const Mlp& other) {
  if (layers_.size() != other.layers_.size()) throw std::invalid_argument("Mlp copy: layout mismatch");
  for (size_t i = 0; i < layers_.size(); ++i) {
    layers_[i].w.mutable_value() = other.layers_[i].w.value();
    layers_[i].b.mutable_value() = other.layers_[i].b.value();
  }
}

Adam::Adam(std::vector<Tensor> params, double lr, double beta1, double beta2, double eps)
    : params_(std::move(params)), lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {
  for (const auto& p : params_) {
    m_.emplace_back(p.value().rows, p.value().cols);
    v_.emplace_back(p.value().rows, p.value().cols);
  }
}

void Adam::zero_grad() {
  for (auto& p : params_) p.zero_grad();
}

void Adam::step(double lr_scale) {
  ++t_;
  double bc1 = 1.0 - std::pow(beta1_, t_);
  double bc2 = 1.0 - std::pow(beta2_, t_);
  double lr = lr_ * lr_scale;
  for (size_t i = 0; i < params_.size(); ++i) {
    const Mat& g = params_[i].grad();
    Mat& val = params_[i].mutable_value();
    if (g.size() != val.size()) continue;  // never touched by backward
    for (size_t j = 0; j < val.size(); ++j) {
      m_[i].d[j] = beta1_ * m_[i].d[j] + (1 - beta1_) * g.d[j];
      v_[i].d[j] = beta2_ * v_[i].d[j] + (1 - beta2_) * g.d[j] * g.d[j];
      double mhat = m_[i].d[j] / bc1;
      double vhat = v_[i].d[j] / bc2;
      val.d[j] -= lr * mhat / (std::sqrt(vhat) + eps_);
    }
  }
}

std::vector<double> flatten_params(const std::vector<Tensor>& params) {
  std::vector<double> flat;
  for (const auto& p : params) flat.insert(flat.end(), p.value().d.begin(), p.value().d.end());
  return flat;
}

void unflatten_params(const std::vector<Tensor>& params, const std::vector<double>& flat) {
  size_t off = 0;
  for (const auto& p : params) {
    Mat& val = const_cast<Tensor&>(p).mutable_value();
    for (auto& v : val.d) v = flat.at(off++);
  }
  if (off != flat.size()) throw std::invalid_argument("unflatten_params: size mismatch");
}

}  // namespace nn
}  // namespace lambdacore
