#pragma once

#include <array>
#include <memory>

#include "lambdacore/cmdp.hpp"

namespace lambdacore {
namespace envs {

// Finite CMDP with time-invariant tables, solved exactly by lp_oracle.
struct TabularCmdp {
  int n_states = 0;
  int n_actions = 0;
  std::vector<double> P;                  // [S*A*S], rows sum to 1
  std::vector<double> r;                  // [S*A]
  std::vector<std::vector<double>> c;     // per constraint, [S*A]
  std::vector<double> rho0;               // initial distribution
  int horizon = 0;
  std::vector<double> d;                  // thresholds

  double p(int s, int a, int s2) const { return P[(static_cast<size_t>(s) * n_actions + a) * n_states + s2]; }
  double& p(int s, int a, int s2) { return P[(static_cast<size_t>(s) * n_actions + a) * n_states + s2]; }
  double reward(int s, int a) const { return r[static_cast<size_t>(s) * n_actions + a]; }
  double cost(int i, int s, int a) const { return c[i][static_cast<size_t>(s) * n_actions + a]; }
  int n_constraints() const { return static_cast<int>(c.size()); }

  void validate() const;  // throws unless rows and rho0 are distributions
};

struct GridConfig {
  int width = 8;
  double slip = 0.1;
  int horizon = 64;
  double threshold = 5.0;
  double goal_reward = 1.0;
};

// 8x8 hazard gridworld: start in one corner, absorbing goal in the opposite
// one, a hazard block in the middle rows, safe monotone detours along the
// edges. Actions 0..3 move +x, -x, +y, -y; slips replace the intended move
// with a uniformly random one.
TabularCmdp make_hazard_grid(const GridConfig& cfg = {});

// Continuous-interface view of a TabularCmdp for the learned agent: the
// observation is the (x, y) cell scaled to [-1, 1]^2 and a 2-D action in
// [-1, 1]^2 selects the move along its dominant axis.
class GridEnv : public cmdp::Env {
 public:
  explicit GridEnv(TabularCmdp cmdp);

  std::vector<double> reset(Rng& rng) override;
  cmdp::StepResult step(const std::vector<double>& action, Rng& rng) override;
  int state_dim() const override { return 2; }
  int action_dim() const override { return 2; }
  int n_constraints() const override { return cmdp_.n_constraints(); }
  int horizon() const override { return cmdp_.horizon; }

  const TabularCmdp& tabular() const { return cmdp_; }
  static int action_to_discrete(const std::vector<double>& a);
  std::vector<double> observe(int s) const;
  int state_index(const std::vector<double>& obs) const;

 private:
  TabularCmdp cmdp_;
  int width_;
  int state_ = 0;
  int step_count_ = 0;
};

struct PointConfig {
  double dt = 0.1;
  double noise_scale = 0.01;
  int horizon = 200;
  double goal_radius = 0.3;
  double goal_bonus = 1.0;
  double vel_limit = 1.0;
  double arena = 2.0;  // positions clipped to [-arena, arena]^2
  double threshold = 5.0;
};

// Continuous 2-D navigation with circular hazards and indicator costs.
// Reward is distance progress toward the goal plus a bonus inside the goal
// radius. State observed as [pos, vel].
class PointHazard2D : public cmdp::Env {
 public:
  explicit PointHazard2D(PointConfig cfg = {});

  std::vector<double> reset(Rng& rng) override;
  cmdp::StepResult step(const std::vector<double>& action, Rng& rng) override;
  int state_dim() const override { return 4; }
  int action_dim() const override { return 2; }
  int n_constraints() const override { return 1; }
  int horizon() const override { return cfg_.horizon; }

  const PointConfig& config() const { return cfg_; }
  bool in_hazard(double x, double y) const;

 private:
  PointConfig cfg_;
  std::vector<double> pos_, vel_, goal_;
  std::vector<std::array<double, 3>> hazards_;  // cx, cy, radius
  int step_count_ = 0;
};

// Applies each agent action k times: rewards summed, costs aggregated with
// max so that a single unsafe sub-step marks the whole macro-step unsafe.
class ActionRepeat : public cmdp::Env {
 public:
  ActionRepeat(std::shared_ptr<cmdp::Env> inner, int k);

  std::vector<double> reset(Rng& rng) override { return inner_->reset(rng); }
  cmdp::StepResult step(const std::vector<double>& action, Rng& rng) override;
  int state_dim() const override { return inner_->state_dim(); }
  int action_dim() const override { return inner_->action_dim(); }
  int n_constraints() const override { return inner_->n_constraints(); }
  int horizon() const override { return inner_->horizon() / k_; }

 private:
  std::shared_ptr<cmdp::Env> inner_;
  int k_;
};

}  // namespace envs
}  // namespace lambdacore
