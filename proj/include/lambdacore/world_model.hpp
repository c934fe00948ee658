#pragma once

#include <optional>
#include <vector>

#include "lambdacore/cmdp.hpp"
#include "lambdacore/nn.hpp"

namespace lambdacore {
namespace world_model {

using diff::Tensor;

struct ModelConfig {
  int state_dim = 0;
  int action_dim = 0;
  int n_constraints = 1;
  int hidden = 64;
  int n_hidden_layers = 2;
  double unsafe_class_weight = 10.0;
  double stddev_floor = 1e-6;
};

struct Prediction {
  Tensor next_state;         // sampled via reparameterization, differentiable
  Tensor next_state_mean;
  Tensor next_state_stddev;
  Tensor reward_mean;        // [B,1]
  std::vector<Tensor> cost_logit;  // per constraint, [B,1]
  std::vector<Tensor> cost_prob;
};

// Stochastic dynamics + reward + per-constraint Bernoulli cost model.
// The dynamics head outputs the mean displacement and the pre-softplus
// stddev of the next-state Gaussian.
class WorldModelParams {
 public:
  WorldModelParams() = default;
  WorldModelParams(const ModelConfig& cfg, Rng& rng);

  Prediction predict(const Tensor& state, const Tensor& action, Rng& rng) const;

  std::vector<Tensor> params() const;
  std::vector<double> to_flat() const;
  void from_flat(const std::vector<double>& flat);
  WorldModelParams clone() const;
  const ModelConfig& config() const { return cfg_; }

 private:
  ModelConfig cfg_;
  nn::Mlp dynamics_;  // (s,a) -> [mean_delta, stddev_pre]
  nn::Mlp reward_;    // (s,a) -> reward mean
  std::vector<nn::Mlp> cost_heads_;
};

struct SwagConfig {
  int burn_in_steps = 500;
  int period_steps = 200;
  int n_models = 20;  // averaging buffer length (informational for the
                      // exponentially decayed moments)
  double decay = 0.8;
  double cyclic_lr_base = 1e-4;
  int cyclic_lr_period = 200;
  double cyclic_lr_peak_factor = 5.0;
};

// Diagonal-Gaussian posterior from exponentially decayed first and second
// moments of the optimizer iterates.
class SwagPosterior {
 public:
  SwagPosterior() = default;
  SwagPosterior(size_t n_params, SwagConfig cfg);

  // Call once per model gradient step with the current flat parameters.
  void observe(const std::vector<double>& flat_params);

  bool ready() const { return n_updates_ > 0; }
  int steps_seen() const { return steps_seen_; }

  // Learning-rate multiplier for the current step of the cyclic schedule,
  // ramping linearly from 1 to the peak factor within each period.
  double lr_scale() const;

  // theta ~ N(running_mean, diag(max(sq_mean - mean^2, 0))). Throws before
  // the burn-in has produced at least one moment update.
  std::vector<double> sample(Rng& rng) const;

  const std::vector<double>& running_mean() const { return mean_; }
  std::vector<double> stddev() const;
  const SwagConfig& config() const { return cfg_; }

 private:
  SwagConfig cfg_;
  std::vector<double> mean_, sq_mean_;
  int steps_seen_ = 0;
  int n_updates_ = 0;
};

struct TrainStepResult {
  double loss = 0.0;
  bool accepted = true;  // non-finite losses reject the step
};

// One NLL gradient step on a batch of replay sub-sequences, plus the SWAG
// moment bookkeeping.
TrainStepResult model_train_step(WorldModelParams& params, SwagPosterior& posterior,
                                 const std::vector<std::vector<cmdp::TransitionRecord>>& batch,
                                 nn::Adam& optimizer, Rng& rng);

// Posterior sample realized as a full parameter set.
WorldModelParams sample_parameters(const WorldModelParams& reference, const SwagPosterior& posterior,
                                   Rng& rng);

}  // namespace world_model
}  // namespace lambdacore
