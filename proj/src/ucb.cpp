#include "lambdacore/ucb.hpp"

#include <stdexcept>

namespace lambdacore {
namespace ucb {

using namespace diff;

BoundEstimate select_max(const std::vector<Tensor>& candidates) {
  if (candidates.empty()) throw std::invalid_argument("select_max: need at least one candidate");
  const int rows = candidates.front().rows();
  BoundEstimate out;
  out.chosen.assign(rows, 0);
  for (size_t j = 1; j < candidates.size(); ++j) {
    if (candidates[j].rows() != rows)
      throw std::invalid_argument("select_max: candidate batch size mismatch");
    for (int r = 0; r < rows; ++r)
      if (candidates[j].value().at(r, 0) > candidates[out.chosen[r]].value().at(r, 0))
        out.chosen[r] = static_cast<int>(j);
  }
  for (size_t j = 0; j < candidates.size(); ++j) {
    Mat mask(rows, 1);
    bool any = false;
    for (int r = 0; r < rows; ++r)
      if (out.chosen[r] == static_cast<int>(j)) {
        mask.at(r, 0) = 1.0;
        any = true;
      }
    if (!any) continue;
    Tensor masked = mul(candidates[j], Tensor::constant(std::move(mask)));
    out.values = out.values.defined() ? add(out.values, masked) : masked;
  }
  return out;
}

Tensor select_mean(const std::vector<Tensor>& candidates) {
  if (candidates.empty()) throw std::invalid_argument("select_mean: need at least one candidate");
  Tensor acc = candidates.front();
  for (size_t j = 1; j < candidates.size(); ++j) acc = add(acc, candidates[j]);
  return mul(acc, 1.0 / static_cast<double>(candidates.size()));
}

Tensor trajectory_value(const std::vector<Tensor>& rewards, const std::vector<Tensor>& states,
                        const std::function<Tensor(const Tensor&)>& bootstrap, double gamma,
                        double lambda) {
  if (states.size() != rewards.size() + 1)
    throw std::invalid_argument("trajectory_value: need H rewards and H+1 states");
  std::vector<Tensor> boots;
  boots.reserve(states.size());
  for (const auto& s : states) boots.push_back(bootstrap(s));
  std::vector<Tensor> targets = critics::td_lambda(rewards, boots, gamma, lambda);
  Tensor acc = targets.front();
  for (size_t t = 1; t < targets.size(); ++t) acc = add(acc, targets[t]);
  return mul(acc, 1.0 / static_cast<double>(targets.size()));
}

std::vector<world_model::WorldModelParams> draw_models(
    const world_model::WorldModelParams& reference, const world_model::SwagPosterior& posterior,
    int n_samples, Rng& rng) {
  if (n_samples < 1) throw std::invalid_argument("draw_models: need n_samples >= 1");
  std::vector<world_model::WorldModelParams> out;
  for (int j = 0; j < n_samples; ++j) {
    if (posterior.ready())
      out.push_back(world_model::sample_parameters(reference, posterior, rng));
    else
      out.push_back(reference.clone());
  }
  return out;
}

std::vector<rollout::Trajectory> rollout_samples(
    const std::vector<world_model::WorldModelParams>& models,
    const constrained_opt::SquashedGaussianPolicy& policy, const Tensor& s_init, int horizon,
    Rng& rng) {
  std::vector<rollout::Trajectory> out;
  for (const auto& m : models)
    out.push_back(rollout::generate_sequence(m, policy, s_init, horizon, rng));
  return out;
}

namespace {

std::vector<Tensor> step_targets(const rollout::Trajectory& traj,
                                 const std::vector<Tensor>& rewards,
                                 const std::function<Tensor(const Tensor&)>& bootstrap,
                                 double gamma, double lambda) {
  std::vector<Tensor> boots;
  boots.reserve(traj.n_steps() + 1);
  for (int t = 0; t <= traj.n_steps(); ++t) boots.push_back(bootstrap(traj.states[t]));
  return critics::td_lambda(rewards, boots, gamma, lambda);
}

}  // namespace

Tensor horizon_mean(const std::vector<Tensor>& targets) {
  if (targets.empty()) throw std::invalid_argument("horizon_mean: empty target list");
  Tensor acc = targets.front();
  for (size_t t = 1; t < targets.size(); ++t) acc = add(acc, targets[t]);
  return mul(acc, 1.0 / static_cast<double>(targets.size()));
}

std::vector<Tensor> task_value_targets(const rollout::Trajectory& trajectory,
                                       const critics::CriticSet& critic_set) {
  return step_targets(
      trajectory, trajectory.reward_means,
      [&](const Tensor& s) { return critic_set.shadow_task_value(s); }, critic_set.config().gamma,
      critic_set.config().td_lambda);
}

std::vector<Tensor> cost_value_targets(const rollout::Trajectory& trajectory,
                                       const critics::CriticSet& critic_set, int constraint) {
  std::vector<Tensor> costs;
  for (int t = 0; t < trajectory.n_steps(); ++t)
    costs.push_back(trajectory.cost_probs[t].at(constraint));
  return step_targets(
      trajectory, costs,
      [&](const Tensor& s) { return critic_set.shadow_safety_value(constraint, s); },
      critic_set.config().gamma_cost, critic_set.config().td_lambda);
}

std::vector<Tensor> task_value_candidates(const std::vector<rollout::Trajectory>& trajectories,
                                          const critics::CriticSet& critic_set) {
  std::vector<Tensor> out;
  for (const auto& traj : trajectories)
    out.push_back(horizon_mean(task_value_targets(traj, critic_set)));
  return out;
}

std::vector<Tensor> cost_value_candidates(const std::vector<rollout::Trajectory>& trajectories,
                                          const critics::CriticSet& critic_set, int constraint) {
  std::vector<Tensor> out;
  for (const auto& traj : trajectories)
    out.push_back(horizon_mean(cost_value_targets(traj, critic_set, constraint)));
  return out;
}

BoundEstimate upper_bound_values(const world_model::WorldModelParams& reference,
                                 const world_model::SwagPosterior& posterior,
                                 const constrained_opt::SquashedGaussianPolicy& policy,
                                 const critics::CriticSet& critic_set, const Tensor& s_init,
                                 int n_samples, int horizon, Rng& rng) {
  auto models = draw_models(reference, posterior, n_samples, rng);
  auto trajs = rollout_samples(models, policy, s_init, horizon, rng);
  return select_max(task_value_candidates(trajs, critic_set));
}

BoundEstimate pessimistic_cost_bound(const world_model::WorldModelParams& reference,
                                     const world_model::SwagPosterior& posterior,
                                     const constrained_opt::SquashedGaussianPolicy& policy,
                                     const critics::CriticSet& critic_set, int constraint,
                                     const Tensor& s_init, int n_samples, int horizon, Rng& rng) {
  auto models = draw_models(reference, posterior, n_samples, rng);
  auto trajs = rollout_samples(models, policy, s_init, horizon, rng);
  return select_max(cost_value_candidates(trajs, critic_set, constraint));
}

Tensor greedy_mean_values(const world_model::WorldModelParams& reference,
                          const world_model::SwagPosterior& posterior,
                          const constrained_opt::SquashedGaussianPolicy& policy,
                          const critics::CriticSet& critic_set, const Tensor& s_init, int n_samples,
                          int horizon, Rng& rng) {
  auto models = draw_models(reference, posterior, n_samples, rng);
  auto trajs = rollout_samples(models, policy, s_init, horizon, rng);
  return select_mean(task_value_candidates(trajs, critic_set));
}

}  // namespace ucb
}  // namespace lambdacore
