#pragma once

#include "lambdacore/critics.hpp"
#include "lambdacore/rollout.hpp"

namespace lambdacore {
namespace ucb {

using diff::Tensor;

struct BoundEstimate {
  Tensor values;             // [R,1] per-root selected estimate
  std::vector<int> chosen;   // per-root index of the selected posterior sample
};

// Per-root maximum across candidate estimates. Constant 0/1 masks route the
// gradient through the maximizing sample's graph only; ties break toward the
// lowest sample index.
BoundEstimate select_max(const std::vector<Tensor>& candidates);

// Per-root mean across candidates (greedy-exploitation baseline).
Tensor select_mean(const std::vector<Tensor>& candidates);

// Horizon-averaged TD(lambda) value of one trajectory:
// (1/H) sum_t V_lambda(s_t), with per-step payoffs given by `rewards` and
// bootstrap values from `bootstrap` evaluated on every state.
Tensor trajectory_value(const std::vector<Tensor>& rewards,
                        const std::vector<Tensor>& states,
                        const std::function<Tensor(const Tensor&)>& bootstrap, double gamma,
                        double lambda);

// N posterior draws realized as full parameter sets; falls back to N copies
// of the reference point estimate until the posterior is ready.
std::vector<world_model::WorldModelParams> draw_models(
    const world_model::WorldModelParams& reference, const world_model::SwagPosterior& posterior,
    int n_samples, Rng& rng);

// One trajectory per sampled model, all from the same roots and policy. The
// trajectories are shared between the task bound and every cost bound.
std::vector<rollout::Trajectory> rollout_samples(
    const std::vector<world_model::WorldModelParams>& models,
    const constrained_opt::SquashedGaussianPolicy& policy, const Tensor& s_init, int horizon,
    Rng& rng);

// Per-step TD(lambda) targets of one trajectory (one [R,1] tensor per step,
// H entries), bootstrapped with the shadow critics.
std::vector<Tensor> task_value_targets(const rollout::Trajectory& trajectory,
                                       const critics::CriticSet& critic_set);
std::vector<Tensor> cost_value_targets(const rollout::Trajectory& trajectory,
                                       const critics::CriticSet& critic_set, int constraint);

// Horizon mean of per-step targets; candidates below are horizon_mean of the
// corresponding per-step targets.
Tensor horizon_mean(const std::vector<Tensor>& targets);

// Per-sample horizon-averaged TD(lambda) estimates, one [R,1] tensor per
// trajectory, bootstrapped with the shadow critics.
std::vector<Tensor> task_value_candidates(const std::vector<rollout::Trajectory>& trajectories,
                                          const critics::CriticSet& critic_set);
std::vector<Tensor> cost_value_candidates(const std::vector<rollout::Trajectory>& trajectories,
                                          const critics::CriticSet& critic_set, int constraint);

// Full optimistic bound: sample N models, roll each out from the same roots
// under the same policy, score with the shadow task critic, take the
// per-root max.
BoundEstimate upper_bound_values(const world_model::WorldModelParams& reference,
                                 const world_model::SwagPosterior& posterior,
                                 const constrained_opt::SquashedGaussianPolicy& policy,
                                 const critics::CriticSet& critic_set, const Tensor& s_init,
                                 int n_samples, int horizon, Rng& rng);

// Same contract applied to safety critic i; the maximizing model may differ
// per constraint and from the task bound.
BoundEstimate pessimistic_cost_bound(const world_model::WorldModelParams& reference,
                                     const world_model::SwagPosterior& posterior,
                                     const constrained_opt::SquashedGaussianPolicy& policy,
                                     const critics::CriticSet& critic_set, int constraint,
                                     const Tensor& s_init, int n_samples, int horizon, Rng& rng);

// Mean instead of max over the sampled models.
Tensor greedy_mean_values(const world_model::WorldModelParams& reference,
                          const world_model::SwagPosterior& posterior,
                          const constrained_opt::SquashedGaussianPolicy& policy,
                          const critics::CriticSet& critic_set, const Tensor& s_init,
                          int n_samples, int horizon, Rng& rng);

}  // namespace ucb
}  // namespace lambdacore
