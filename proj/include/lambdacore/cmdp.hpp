#pragma once

#include <functional>
#include <string>
#include <vector>

#include "lambdacore/rng.hpp"

namespace lambdacore {
namespace cmdp {

struct TransitionRecord {
  std::vector<double> state;
  std::vector<double> action;  // components in [-1, 1]
  double reward = 0.0;
  std::vector<double> costs;  // one entry per constraint
  std::vector<double> next_state;
  bool terminal = false;
};

using Episode = std::vector<TransitionRecord>;

struct StepResult {
  std::vector<double> next_state;
  double reward = 0.0;
  std::vector<double> costs;
  bool terminal = false;
  bool action_clipped = false;
};

// Episodic CMDP environment. Out-of-range actions are clipped and flagged.
class Env {
 public:
  virtual ~Env() = default;
  virtual std::vector<double> reset(Rng& rng) = 0;
  virtual StepResult step(const std::vector<double>& action, Rng& rng) = 0;
  virtual int state_dim() const = 0;
  virtual int action_dim() const = 0;
  virtual int n_constraints() const = 0;
  virtual int horizon() const = 0;
};

struct Thresholds {
  std::vector<double> d;  // elementwise >= 0
};

struct MetricsReport {
  double J_hat = 0.0;               // average undiscounted episodic return
  std::vector<double> Jc_hat;       // per-constraint average episodic cost return
  double cost_regret = 0.0;         // rho_c over training steps
  long steps = 0;                   // total environment steps T
  std::string to_json() const;      // {"J": ..., "Jc": ..., "rho_c": ..., "steps": ...}
};

struct NormalizedMetrics {
  double J_bar = 0.0;
  std::vector<double> Jc_bar;
  double rho_bar = 0.0;
};

// Sub-sequence sampling for model learning. Episodes are stored whole;
// sample_sequence picks uniformly over all valid in-episode start indices.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(size_t capacity = 0) : capacity_(capacity) {}

  void add_episode(Episode ep);
  size_t n_episodes() const { return episodes_.size(); }
  size_t n_transitions() const { return n_transitions_; }
  const Episode& episode(size_t i) const { return episodes_.at(i); }

  // Contiguous in-episode sub-sequence of exact length len.
  std::vector<TransitionRecord> sample_sequence(int len, Rng& rng) const;

 private:
  std::vector<Episode> episodes_;
  size_t capacity_;
  size_t n_transitions_ = 0;
};

double episodic_return(const Episode& episode);
double episodic_cost_return(const Episode& episode, int constraint);

// Deterministic or stochastic action map used during evaluation.
using PolicyFn = std::function<std::vector<double>(const std::vector<double>& state, Rng& rng)>;

// Runs E frozen-policy episodes of at most t_ep steps each; interactions are
// not counted toward training cost regret.
MetricsReport evaluate_policy(Env& env, const PolicyFn& policy, int n_episodes, int t_ep, Rng& rng);

double cost_regret(const std::vector<double>& training_costs, long total_steps);

// Appendix-style normalization against a characteristic (unconstrained
// reference) agent's metrics.
NormalizedMetrics normalize_metrics(const MetricsReport& raw, const MetricsReport& characteristic,
                                    const Thresholds& d);

}  // namespace cmdp
}  // namespace lambdacore
