#pragma once

#include <vector>

#include "lambdacore/nn.hpp"

namespace lambdacore {
namespace constrained_opt {

using diff::Tensor;

// Augmented Lagrangian state: multipliers stay nonnegative, the penalty
// grows multiplicatively and never decreases.
struct LagrangeState {
  std::vector<double> lambda;  // one per constraint
  double mu = 5e-9;
  double mu_growth = 1.0 + 1e-5;

  static LagrangeState init(int n_constraints, double lambda0 = 1e-6, double mu0 = 5e-9,
                            double growth_rate = 1e-5) {
    LagrangeState s;
    s.lambda.assign(n_constraints, lambda0);
    s.mu = mu0;
    s.mu_growth = 1.0 + growth_rate;
    return s;
  }
};

// Piecewise penalty: the active branch is the linear+quadratic term, the
// inactive branch is the constant -lambda^2 / (2 mu); continuous at the
// switch point. Differentiable in Jc on the active branch only.
Tensor penalty_psi(const Tensor& jc_est, double d, double lambda_k, double mu_k);
double penalty_psi_value(double jc, double d, double lambda_k, double mu_k);

// lambda <- max(0, lambda + mu (Jc - d)) per constraint, then mu grows.
LagrangeState lambda_update(const LagrangeState& state, const std::vector<double>& jc_est,
                            const std::vector<double>& d);

// tanh-squashed Gaussian policy: network emits pre-squash mean and
// pre-softplus stddev; actions land strictly inside (-1, 1).
class SquashedGaussianPolicy {
 public:
  SquashedGaussianPolicy() = default;
  SquashedGaussianPolicy(int state_dim, int action_dim, Rng& rng, int hidden = 64,
                         int n_hidden_layers = 2, double stddev_floor = 1e-4);

  // a = tanh(mu(s) + sigma(s) * eps); differentiable w.r.t. parameters.
  Tensor sample_action(const Tensor& state, Rng& rng) const;
  Tensor mean_action(const Tensor& state) const;  // tanh(mu(s))
  Tensor stddev(const Tensor& state) const;

  std::vector<double> act(const std::vector<double>& state, Rng& rng) const;
  std::vector<double> act_mean(const std::vector<double>& state) const;

  std::vector<Tensor> params() const { return net_.params(); }
  int action_dim() const { return action_dim_; }
  std::vector<double> to_flat() const { return net_.to_flat(); }
  void from_flat(const std::vector<double>& flat) {
    size_t off = 0;
    net_.from_flat(flat, off);
  }

 private:
  std::pair<Tensor, Tensor> mean_stddev(const Tensor& state) const;
  nn::Mlp net_;
  int action_dim_ = 0;
  double stddev_floor_ = 1e-4;
};

struct PolicyLossResult {
  Tensor loss;
  double task_term = 0.0;          // mean optimistic value (before negation)
  std::vector<double> jc_est;      // per-constraint pessimistic estimate
  std::vector<double> psi;         // realized penalty values
};

// Eq.-style policy objective: negated mean of the optimistic task values
// plus the penalty of each pessimistic constraint estimate. task_values and
// cost_values are the per-root selected bounds, averaged over the horizon.
PolicyLossResult policy_loss(const Tensor& task_values,
                             const std::vector<Tensor>& cost_values,
                             const LagrangeState& state, const std::vector<double>& d);

}  // namespace constrained_opt
}  // namespace lambdacore
