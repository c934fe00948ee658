#pragma once

#include <string>
#include <vector>

#include "lambdacore/diff.hpp"

namespace lambdacore {
namespace nn {

using diff::Tensor;

// Fully connected network with ELU hidden activations and a linear head.
// Parameters are persistent leaf tensors; the graph is rebuilt per forward.
class Mlp {
 public:
  Mlp() = default;
  // sizes = {in, hidden..., out}. The output layer weights start at zero when
  // zero_init_head is set, so an untrained head predicts exactly zero.
  Mlp(const std::vector<int>& sizes, Rng& rng, bool zero_init_head = true);

  Tensor forward(const Tensor& x) const;
  std::vector<Tensor> params() const;
  int in_dim() const { return in_dim_; }
  int out_dim() const { return out_dim_; }

  // Flat parameter vector in layer order, row-major per matrix.
  std::vector<double> to_flat() const;
  void from_flat(const std::vector<double>& flat, size_t& offset);
  size_t n_params() const;

  Mlp clone() const;  // deep copy with fresh leaves
  void copy_values_from(const Mlp& other);

 private:
  struct Layer {
    Tensor w;  // [in, out]
    Tensor b;  // [1, out]
  };
  std::vector<Layer> layers_;
  int in_dim_ = 0;
  int out_dim_ = 0;
};

// ADAM over a fixed parameter list.
class Adam {
 public:
  explicit Adam(std::vector<Tensor> params, double lr = 1e-3, double beta1 = 0.9,
                double beta2 = 0.999, double eps = 1e-8);

  void zero_grad();
  // Applies one update from accumulated gradients; lr_scale rescales the base
  // learning rate for this step (cyclic schedules).
  void step(double lr_scale = 1.0);
  double lr() const { return lr_; }

 private:
  std::vector<Tensor> params_;
  std::vector<Mat> m_, v_;
  double lr_, beta1_, beta2_, eps_;
  long t_ = 0;
};

std::vector<double> flatten_params(const std::vector<Tensor>& params);
void unflatten_params(const std::vector<Tensor>& params, const std::vector<double>& flat);

}  // namespace nn
}  // namespace lambdacore
