#pragma once

#include <memory>

#include "lambdacore/nn.hpp"

namespace lambdacore {
namespace critics {

using diff::Tensor;

// Backward TD(lambda) recursion:
//   V(t) = r_t + gamma * ((1 - lambda) * v(t+1) + lambda * V(t+1)),
//   V(H) = v(H).
// rewards has H entries, bootstrap_values H+1; returns targets for t = 0..H-1.
// Works on plain doubles and on graph tensors alike.
template <class T>
std::vector<T> td_lambda(const std::vector<T>& rewards, const std::vector<T>& bootstrap_values,
                         double gamma, double lambda) {
  if (bootstrap_values.size() != rewards.size() + 1)
    throw std::invalid_argument("td_lambda: need H rewards and H+1 bootstrap values");
  const int H = static_cast<int>(rewards.size());
  std::vector<T> targets(H, rewards.empty() ? T{} : rewards[0]);
  T carry = bootstrap_values[H];
  for (int t = H - 1; t >= 0; --t) {
    carry = rewards[t] + gamma * ((1.0 - lambda) * bootstrap_values[t + 1] + lambda * carry);
    targets[t] = carry;
  }
  return targets;
}

struct CriticConfig {
  int state_dim = 0;
  int n_constraints = 1;
  int hidden = 64;
  int n_hidden_layers = 2;
  double gamma = 0.99;
  double gamma_cost = 0.995;
  double td_lambda = 0.95;
  int shadow_clone_period = 100;  // U
  double task_lr = 8e-5;
  double safety_lr = 2e-4;
};

// Task critic, per-constraint safety critics, and their shadow copies used
// for bootstrap targets. Shadows lag the mains by up to U update steps.
class CriticSet {
 public:
  CriticSet() = default;
  CriticSet(const CriticConfig& cfg, Rng& rng);

  Tensor task_value(const Tensor& states) const { return task_.forward(states); }
  Tensor safety_value(int i, const Tensor& states) const { return safety_[i].forward(states); }
  Tensor shadow_task_value(const Tensor& states) const { return shadow_task_.forward(states); }
  Tensor shadow_safety_value(int i, const Tensor& states) const {
    return shadow_safety_[i].forward(states);
  }

  // Weighted value-regression batch. Each entry pairs one [R,1]-per-state
  // batch with its detached target; weights (optional) mask out roots whose
  // selected trajectory came from a different posterior sample.
  struct RegressionBatch {
    std::vector<Tensor> states;
    std::vector<Mat> targets;
    std::vector<Mat> weights;  // empty = all ones
  };

  // One MSE gradient step of every critic toward its targets; loss is
  // (1/2H) sum_t of the weighted per-root mean squared error. Rejects the
  // step on a non-finite loss; returns the realized task loss.
  double train_step(const RegressionBatch& task, const std::vector<RegressionBatch>& safety);

  // Copies main -> shadow once every U calls.
  void maybe_clone_shadow();
  void force_clone_shadow();
  int steps_since_clone() const { return steps_since_clone_; }

  const CriticConfig& config() const { return cfg_; }
  std::vector<Tensor> task_params() const { return task_.params(); }
  std::vector<Tensor> safety_params(int i) const { return safety_[i].params(); }
  std::vector<double> to_flat() const;
  void from_flat(const std::vector<double>& flat);

 private:
  CriticConfig cfg_;
  nn::Mlp task_, shadow_task_;
  std::vector<nn::Mlp> safety_, shadow_safety_;
  std::unique_ptr<nn::Adam> task_opt_;
  std::vector<std::unique_ptr<nn::Adam>> safety_opt_;
  int steps_since_clone_ = 0;
};

}  // namespace critics
}  // namespace lambdacore
