#include "lambdacore/constrained_opt.hpp"

#include <cmath>
#include <stdexcept>

namespace lambdacore {
namespace constrained_opt {

using namespace diff;

Tensor penalty_psi(const Tensor& jc_est, double d, double lambda_k, double mu_k) {
  if (mu_k <= 0.0) throw std::invalid_argument("penalty_psi: mu must be positive");
  if (lambda_k < 0.0) throw std::invalid_argument("penalty_psi: lambda must be nonnegative");
  double gap = jc_est.scalar() - d;
  if (lambda_k + mu_k * gap >= 0.0) {
    Tensor g = jc_est - d;
    return mul(g, lambda_k) + mul(square(g), 0.5 * mu_k);
  }
  // Inactive branch: constant in Jc.
  return Tensor::constant(-lambda_k * lambda_k / (2.0 * mu_k));
}

double penalty_psi_value(double jc, double d, double lambda_k, double mu_k) {
  if (mu_k <= 0.0) throw std::invalid_argument("penalty_psi: mu must be positive");
  double gap = jc - d;
  if (lambda_k + mu_k * gap >= 0.0) return lambda_k * gap + 0.5 * mu_k * gap * gap;
  return -lambda_k * lambda_k / (2.0 * mu_k);
}

LagrangeState lambda_update(const LagrangeState& state, const std::vector<double>& jc_est,
                            const std::vector<double>& d) {
  LagrangeState next = state;
  for (size_t i = 0; i < state.lambda.size(); ++i) {
    double candidate = state.lambda[i] + state.mu * (jc_est.at(i) - d.at(i));
    next.lambda[i] = std::max(0.0, candidate);
  }
  next.mu = state.mu * state.mu_growth;
  return next;
}

SquashedGaussianPolicy::SquashedGaussianPolicy(int state_dim, int action_dim, Rng& rng, int hidden,
                                               int n_hidden_layers, double stddev_floor)
    : action_dim_(action_dim), stddev_floor_(stddev_floor) {
  std::vector<int> sizes{state_dim};
  for (int i = 0; i < n_hidden_layers; ++i) sizes.push_back(hidden);
  sizes.push_back(2 * action_dim);
  net_ = nn::Mlp(sizes, rng);
}

std::pair<Tensor, Tensor> SquashedGaussianPolicy::mean_stddev(const Tensor& state) const {
  Tensor out = net_.forward(state);
  Tensor mu = slice_cols(out, 0, action_dim_);
  Tensor sigma = add(softplus(slice_cols(out, action_dim_, 2 * action_dim_)), stddev_floor_);
  return {mu, sigma};
}

Tensor SquashedGaussianPolicy::sample_action(const Tensor& state, Rng& rng) const {
  auto [mu, sigma] = mean_stddev(state);
  return tanh(gaussian_reparam_sample(mu, sigma, rng));
}

Tensor SquashedGaussianPolicy::mean_action(const Tensor& state) const {
  return tanh(mean_stddev(state).first);
}

Tensor SquashedGaussianPolicy::stddev(const Tensor& state) const {
  return mean_stddev(state).second;
}

std::vector<double> SquashedGaussianPolicy::act(const std::vector<double>& state, Rng& rng) const {
  Tensor s = Tensor::constant(Mat::row(state));
  return sample_action(s, rng).value().d;
}

std::vector<double> SquashedGaussianPolicy::act_mean(const std::vector<double>& state) const {
  Tensor s = Tensor::constant(Mat::row(state));
  return mean_action(s).value().d;
}

PolicyLossResult policy_loss(const Tensor& task_values, const std::vector<Tensor>& cost_values,
                             const LagrangeState& state, const std::vector<double>& d) {
  PolicyLossResult out;
  Tensor task_mean = mean(task_values);
  out.task_term = task_mean.scalar();
  out.loss = neg(task_mean);
  for (size_t i = 0; i < cost_values.size(); ++i) {
    Tensor jc = mean(cost_values[i]);
    out.jc_est.push_back(jc.scalar());
    Tensor psi = penalty_psi(jc, d.at(i), state.lambda.at(i), state.mu);
    out.psi.push_back(psi.scalar());
    out.loss = add(out.loss, psi);
  }
  if (!std::isfinite(out.loss.scalar())) throw std::runtime_error("policy_loss: non-finite loss");
  return out;
}

}  // namespace constrained_opt
}  // namespace lambdacore
