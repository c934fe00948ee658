#include "lambdacore/rollout.hpp"

#include <stdexcept>

namespace lambdacore {
namespace rollout {

using namespace diff;

Trajectory generate_sequence(const world_model::WorldModelParams& params,
                             const constrained_opt::SquashedGaussianPolicy& policy,
                             const Tensor& initial_states, int horizon, Rng& rng) {
  if (horizon < 1) throw std::invalid_argument("generate_sequence: horizon must be >= 1");
  Trajectory traj;
  traj.states.push_back(initial_states);
  Tensor s = initial_states;
  for (int t = 0; t < horizon; ++t) {
    Tensor a = policy.sample_action(stop_gradient(s), rng);
    world_model::Prediction pred = params.predict(s, a, rng);
    if (!pred.next_state.value().all_finite()) {
      traj.truncated = true;
      break;
    }
    traj.actions.push_back(a);
    traj.reward_means.push_back(pred.reward_mean);
    traj.cost_probs.push_back(pred.cost_prob);
    traj.states.push_back(pred.next_state);
    s = pred.next_state;
  }
  return traj;
}

Tensor initial_states_from_batch(const std::vector<std::vector<cmdp::TransitionRecord>>& batch) {
  int total = 0;
  for (const auto& seq : batch) total += static_cast<int>(seq.size());
  if (total == 0) throw std::invalid_argument("initial_states_from_batch: empty batch");
  int n = static_cast<int>(batch.front().front().state.size());
  Mat roots(total, n);
  int row = 0;
  for (const auto& seq : batch)
    for (const auto& tr : seq) {
      for (int j = 0; j < n; ++j) {
        double v = tr.state.at(j);
        if (!std::isfinite(v)) throw std::invalid_argument("initial_states_from_batch: non-finite state");
        roots.at(row, j) = v;
      }
      ++row;
    }
  return Tensor::constant(std::move(roots));
}

}  // namespace rollout
}  // namespace lambdacore
