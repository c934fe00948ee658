#pragma once

#include <memory>
#include <string>

#include "lambdacore/config.hpp"
#include "lambdacore/constrained_opt.hpp"
#include "lambdacore/critics.hpp"
#include "lambdacore/envs.hpp"
#include "lambdacore/ucb.hpp"

namespace lambdacore {
namespace agent {

struct EpisodeLog {
  int episode = 0;
  long env_steps = 0;
  double J = 0.0;
  std::vector<double> Jc;
  double rho_c = 0.0;
  std::vector<double> lambda;
  double mu = 0.0;
  double model_nll = 0.0;
  double policy_loss = 0.0;
  long long simulated_interactions = 0;
  bool aborted = false;

  std::string to_json() const;
};

struct TrainResult {
  std::vector<EpisodeLog> episodes;
  cmdp::MetricsReport final_eval;
  long long simulated_interactions = 0;
};

// Model-generated interaction volume of one outer iteration:
// (B*L roots) * H * N * U.
long long simulated_interactions_per_episode(const config::AgentConfig& cfg);

// The full training loop: per outer iteration, U update steps (model ->
// bounds -> critics -> policy -> multipliers) followed by one environment
// episode appended to the replay buffer.
class Agent {
 public:
  explicit Agent(const config::AgentConfig& cfg);

  TrainResult train();
  EpisodeLog train_episode();  // warmup happens lazily before the first one

  cmdp::MetricsReport evaluate(int n_episodes, int t_ep);
  cmdp::MetricsReport evaluate() { return evaluate(cfg_.eval_episodes, cfg_.eval_horizon); }

  void save_checkpoint(const std::string& dir) const;
  void load_checkpoint(const std::string& dir);

  const config::AgentConfig& config() const { return cfg_; }
  const constrained_opt::LagrangeState& lagrange() const { return lagrange_; }
  const constrained_opt::SquashedGaussianPolicy& policy() const { return policy_; }
  const cmdp::ReplayBuffer& replay() const { return replay_; }
  long long simulated_interactions() const { return sim_interactions_; }
  long env_steps() const { return env_steps_; }
  cmdp::Env& env() { return *env_; }
  const envs::TabularCmdp* tabular() const { return grid_ ? &grid_->tabular() : nullptr; }

 private:
  void ensure_warmup();
  void update_step();
  void collect_episode(bool random_policy);

  config::AgentConfig cfg_;
  std::shared_ptr<cmdp::Env> env_;
  std::shared_ptr<envs::GridEnv> grid_;  // set when env_name is a gridworld

  world_model::WorldModelParams model_;
  world_model::SwagPosterior posterior_;
  std::unique_ptr<nn::Adam> model_opt_;
  critics::CriticSet critics_;
  constrained_opt::SquashedGaussianPolicy policy_;
  std::unique_ptr<nn::Adam> policy_opt_;
  constrained_opt::LagrangeState lagrange_;
  cmdp::ReplayBuffer replay_;

  Rng rng_env_{0}, rng_train_{0}, rng_eval_{0};
  double training_cost_sum_ = 0.0;
  long training_interactions_ = 0;  // macro steps seen during training
  long env_steps_ = 0;              // micro steps (macro * action_repeat)
  long long sim_interactions_ = 0;
  double last_model_loss_ = 0.0;
  double last_policy_loss_ = 0.0;
  bool warmed_ = false;
  int episode_index_ = 0;
  bool last_update_aborted_ = false;
  std::string abort_diagnostic_;
};

std::shared_ptr<cmdp::Env> make_env(const config::AgentConfig& cfg,
                                    std::shared_ptr<envs::GridEnv>* grid_out = nullptr);

}  // namespace agent
}  // namespace lambdacore
