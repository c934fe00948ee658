#pragma once

#include "lambdacore/constrained_opt.hpp"
#include "lambdacore/world_model.hpp"

namespace lambdacore {
namespace rollout {

using diff::Tensor;

// One differentiable model trajectory for a batch of rollout roots. All
// tensors share a single differentiation graph; gradients reach actions only
// from values of succeeding states because the policy is conditioned on a
// stop-gradient copy of the state.
struct Trajectory {
  std::vector<Tensor> states;        // H+1 entries of [R, n] (fewer if truncated)
  std::vector<Tensor> actions;       // one per transition
  std::vector<Tensor> reward_means;  // one per transition, [R, 1]
  std::vector<std::vector<Tensor>> cost_probs;  // [transition][constraint], [R, 1]
  bool truncated = false;  // hit a non-finite state before reaching H
  int n_roots() const { return states.empty() ? 0 : states.front().rows(); }
  int n_steps() const { return static_cast<int>(actions.size()); }
};

Trajectory generate_sequence(const world_model::WorldModelParams& params,
                             const constrained_opt::SquashedGaussianPolicy& policy,
                             const Tensor& initial_states, int horizon, Rng& rng);

// Every state of every replay sub-sequence becomes a rollout root: B
// sequences of length L flatten to a [B*L, n] batch.
Tensor initial_states_from_batch(const std::vector<std::vector<cmdp::TransitionRecord>>& batch);

}  // namespace rollout
}  // namespace lambdacore
