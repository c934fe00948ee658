#include "lambdacore/critics.hpp"

#include <cmath>
#include <stdexcept>

namespace lambdacore {
namespace critics {

using namespace diff;

CriticSet::CriticSet(const CriticConfig& cfg, Rng& rng) : cfg_(cfg) {
  std::vector<int> sizes{cfg.state_dim};
  for (int i = 0; i < cfg.n_hidden_layers; ++i) sizes.push_back(cfg.hidden);
  sizes.push_back(1);
  task_ = nn::Mlp(sizes, rng);
  shadow_task_ = task_.clone();
  for (int i = 0; i < cfg.n_constraints; ++i) {
    safety_.emplace_back(sizes, rng);
    shadow_safety_.push_back(safety_.back().clone());
  }
  task_opt_ = std::make_unique<nn::Adam>(task_.params(), cfg.task_lr);
  for (int i = 0; i < cfg.n_constraints; ++i)
    safety_opt_.push_back(std::make_unique<nn::Adam>(safety_[i].params(), cfg.safety_lr));
}

namespace {

Tensor regression_loss(const CriticSet::RegressionBatch& batch,
                       const std::function<Tensor(const Tensor&)>& value_fn) {
  if (batch.states.size() != batch.targets.size())
    throw std::invalid_argument("CriticSet: states/targets length mismatch");
  const double scale = 1.0 / (2.0 * static_cast<double>(batch.states.size()));
  Tensor loss;
  for (size_t t = 0; t < batch.states.size(); ++t) {
    Tensor detached = stop_gradient(batch.states[t]);
    Tensor err = square(sub(value_fn(detached), Tensor::constant(batch.targets[t])));
    if (!batch.weights.empty()) err = mul(err, Tensor::constant(batch.weights.at(t)));
    Tensor term = mean(err);
    loss = t == 0 ? term : add(loss, term);
  }
  return mul(loss, scale);
}

}  // namespace

double CriticSet::train_step(const RegressionBatch& task, const std::vector<RegressionBatch>& safety) {
  Tensor task_loss = regression_loss(task, [this](const Tensor& s) { return task_value(s); });
  double loss_value = task_loss.scalar();
  if (!std::isfinite(loss_value)) return loss_value;  // rejected step
  task_opt_->zero_grad();
  backward(task_loss);
  task_opt_->step();

  for (size_t i = 0; i < safety_.size(); ++i) {
    Tensor loss = regression_loss(safety.at(i), [this, i](const Tensor& s) {
      return safety_value(static_cast<int>(i), s);
    });
    if (!std::isfinite(loss.scalar())) continue;
    safety_opt_[i]->zero_grad();
    backward(loss);
    safety_opt_[i]->step();
  }

  ++steps_since_clone_;
  maybe_clone_shadow();
  return loss_value;
}

void CriticSet::maybe_clone_shadow() {
  if (steps_since_clone_ < cfg_.shadow_clone_period) return;
  force_clone_shadow();
}

void CriticSet::force_clone_shadow() {
  shadow_task_.copy_values_from(task_);
  for (size_t i = 0; i < safety_.size(); ++i) shadow_safety_[i].copy_values_from(safety_[i]);
  steps_since_clone_ = 0;
}

std::vector<double> CriticSet::to_flat() const {
  std::vector<double> flat = task_.to_flat();
  for (const auto& s : safety_) {
    auto f = s.to_flat();
    flat.insert(flat.end(), f.begin(), f.end());
  }
  return flat;
}

void CriticSet::from_flat(const std::vector<double>& flat) {
  size_t off = 0;
  task_.from_flat(flat, off);
  for (auto& s : safety_) s.from_flat(flat, off);
  force_clone_shadow();
}

}  // namespace critics
}  // namespace lambdacore
