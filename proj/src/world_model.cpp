#include "lambdacore/world_model.hpp"

#include <cmath>
#include <stdexcept>

namespace lambdacore {
namespace world_model {

using namespace diff;

WorldModelParams::WorldModelParams(const ModelConfig& cfg, Rng& rng) : cfg_(cfg) {
  std::vector<int> dyn_sizes{cfg.state_dim + cfg.action_dim};
  for (int i = 0; i < cfg.n_hidden_layers; ++i) dyn_sizes.push_back(cfg.hidden);
  std::vector<int> rew_sizes = dyn_sizes, cost_sizes = dyn_sizes;
  dyn_sizes.push_back(2 * cfg.state_dim);
  rew_sizes.push_back(1);
  cost_sizes.push_back(1);
  dynamics_ = nn::Mlp(dyn_sizes, rng);
  reward_ = nn::Mlp(rew_sizes, rng);
  for (int i = 0; i < cfg.n_constraints; ++i) cost_heads_.emplace_back(cost_sizes, rng);
}

Prediction WorldModelParams::predict(const Tensor& state, const Tensor& action, Rng& rng) const {
  Tensor sa = hcat(state, action);
  Tensor dyn = dynamics_.forward(sa);
  int n = cfg_.state_dim;
  Prediction out;
  out.next_state_mean = add(state, slice_cols(dyn, 0, n));
  out.next_state_stddev = add(softplus(slice_cols(dyn, n, 2 * n)), cfg_.stddev_floor);
  out.next_state = gaussian_reparam_sample(out.next_state_mean, out.next_state_stddev, rng);
  out.reward_mean = reward_.forward(sa);
  for (const auto& head : cost_heads_) {
    Tensor logit = head.forward(sa);
    out.cost_logit.push_back(logit);
    out.cost_prob.push_back(sigmoid(logit));
  }
  return out;
}

std::vector<Tensor> WorldModelParams::params() const {
  std::vector<Tensor> out = dynamics_.params();
  for (const auto& p : reward_.params()) out.push_back(p);
  for (const auto& head : cost_heads_)
    for (const auto& p : head.params()) out.push_back(p);
  return out;
}

std::vector<double> WorldModelParams::to_flat() const { return nn::flatten_params(params()); }

void WorldModelParams::from_flat(const std::vector<double>& flat) {
  nn::unflatten_params(params(), flat);
}

WorldModelParams WorldModelParams::clone() const {
  WorldModelParams c;
  c.cfg_ = cfg_;
  c.dynamics_ = dynamics_.clone();
  c.reward_ = reward_.clone();
  for (const auto& head : cost_heads_) c.cost_heads_.push_back(head.clone());
  return c;
}

SwagPosterior::SwagPosterior(size_t n_params, SwagConfig cfg)
    : cfg_(cfg), mean_(n_params, 0.0), sq_mean_(n_params, 0.0) {}

void SwagPosterior::observe(const std::vector<double>& flat_params) {
  if (flat_params.size() != mean_.size())
    throw std::invalid_argument("SwagPosterior::observe: parameter count mismatch");
  ++steps_seen_;
  if (steps_seen_ <= cfg_.burn_in_steps) return;
  if (cfg_.period_steps > 0 && (steps_seen_ - cfg_.burn_in_steps) % cfg_.period_steps != 0) return;
  if (n_updates_ == 0) {
    for (size_t i = 0; i < mean_.size(); ++i) {
      mean_[i] = flat_params[i];
      sq_mean_[i] = flat_params[i] * flat_params[i];
    }
  } else {
    double a = cfg_.decay;
    for (size_t i = 0; i < mean_.size(); ++i) {
      mean_[i] = a * mean_[i] + (1.0 - a) * flat_params[i];
      sq_mean_[i] = a * sq_mean_[i] + (1.0 - a) * flat_params[i] * flat_params[i];
    }
  }
  ++n_updates_;
}

double SwagPosterior::lr_scale() const {
  if (cfg_.cyclic_lr_period <= 1) return 1.0;
  double phase = static_cast<double>(steps_seen_ % cfg_.cyclic_lr_period) /
                 static_cast<double>(cfg_.cyclic_lr_period - 1);
  return 1.0 + phase * (cfg_.cyclic_lr_peak_factor - 1.0);
}

std::vector<double> SwagPosterior::stddev() const {
  std::vector<double> sd(mean_.size());
  for (size_t i = 0; i < mean_.size(); ++i)
    sd[i] = std::sqrt(std::max(sq_mean_[i] - mean_[i] * mean_[i], 0.0));
  return sd;
}

std::vector<double> SwagPosterior::sample(Rng& rng) const {
  if (!ready())
    throw std::runtime_error("SwagPosterior::sample called before burn-in completed");
  std::vector<double> sd = stddev();
  std::vector<double> out(mean_.size());
  for (size_t i = 0; i < mean_.size(); ++i)
    out[i] = mean_[i] + (sd[i] > 0.0 ? sd[i] * rng.normal() : 0.0);
  return out;
}

TrainStepResult model_train_step(WorldModelParams& params, SwagPosterior& posterior,
                                 const std::vector<std::vector<cmdp::TransitionRecord>>& batch,
                                 nn::Adam& optimizer, Rng& rng) {
  const ModelConfig& cfg = params.config();
  // Flatten sequences into one transition batch; the model is Markov so the
  // sequence structure only matters for where the data came from.
  int total = 0;
  for (const auto& seq : batch) total += static_cast<int>(seq.size());
  if (total == 0) throw std::invalid_argument("model_train_step: empty batch");
  Mat s(total, cfg.state_dim), a(total, cfg.action_dim), s2(total, cfg.state_dim), rew(total, 1);
  std::vector<Mat> costs(cfg.n_constraints, Mat(total, 1));
  int row = 0;
  for (const auto& seq : batch)
    for (const auto& tr : seq) {
      for (int j = 0; j < cfg.state_dim; ++j) {
        s.at(row, j) = tr.state.at(j);
        s2.at(row, j) = tr.next_state.at(j);
      }
      for (int j = 0; j < cfg.action_dim; ++j) a.at(row, j) = tr.action.at(j);
      rew.at(row, 0) = tr.reward;
      for (int i = 0; i < cfg.n_constraints; ++i) costs[i].at(row, 0) = tr.costs.at(i);
      ++row;
    }

  Tensor st = Tensor::constant(std::move(s));
  Tensor at = Tensor::constant(std::move(a));
  Prediction pred = params.predict(st, at, rng);
  Tensor target = Tensor::constant(std::move(s2));

  // Gaussian NLL for dynamics, unit-variance Gaussian for reward.
  Tensor z = div(sub(target, pred.next_state_mean), pred.next_state_stddev);
  Tensor dyn_nll = add(mul(square(z), 0.5), log(pred.next_state_stddev));
  Tensor loss = mean(dyn_nll);
  loss = add(loss, mean(mul(square(sub(Tensor::constant(std::move(rew)), pred.reward_mean)), 0.5)));

  // Class-weighted binary cross-entropy with logits for each cost head.
  for (int i = 0; i < cfg.n_constraints; ++i) {
    Tensor y = Tensor::constant(costs[i]);
    Mat w(total, 1);
    for (int r2 = 0; r2 < total; ++r2)
      w.at(r2, 0) = costs[i].at(r2, 0) > 0.5 ? cfg.unsafe_class_weight : 1.0;
    Tensor bce = sub(softplus(pred.cost_logit[i]), mul(y, pred.cost_logit[i]));
    loss = add(loss, mean(mul(bce, Tensor::constant(std::move(w)))));
  }

  TrainStepResult out;
  out.loss = loss.scalar();
  if (!std::isfinite(out.loss)) {
    out.accepted = false;
    return out;
  }
  optimizer.zero_grad();
  backward(loss);
  optimizer.step(posterior.lr_scale());
  posterior.observe(params.to_flat());
  return out;
}

WorldModelParams sample_parameters(const WorldModelParams& reference, const SwagPosterior& posterior,
                                   Rng& rng) {
  WorldModelParams out = reference.clone();
  out.from_flat(posterior.sample(rng));
  return out;
}

}  // namespace world_model
}  // namespace lambdacore
