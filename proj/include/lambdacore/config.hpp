#pragma once

#include <map>
#include <string>

namespace lambdacore {
namespace config {

// Flat `key = value` text with [section] headers; keys are addressed as
// "section.key". Lines starting with '#' are comments.
class KeyValueConfig {
 public:
  static KeyValueConfig parse(const std::string& text);
  static KeyValueConfig load(const std::string& path);

  bool has(const std::string& key) const { return values_.count(key) > 0; }
  std::string get(const std::string& key, const std::string& fallback) const;
  double get(const std::string& key, double fallback) const;
  int get(const std::string& key, int fallback) const;
  bool get(const std::string& key, bool fallback) const;
  void set(const std::string& key, const std::string& value) { values_[key] = value; }

  // Deterministic (sorted) serialization, re-parseable.
  std::string serialize() const;

 private:
  std::map<std::string, std::string> values_;
};

enum class AgentMode { kLambda, kGreedy, kUnsafe };

// Every Table-1-style hyperparameter under its config key, plus desk-scale
// run control. Defaults follow the reference configuration; the env presets
// rescale them so a full run fits on a laptop CPU.
struct AgentConfig {
  std::string env_name = "grid8";
  AgentMode mode = AgentMode::kLambda;
  uint64_t seed = 0;

  // world_model
  int batch_size = 32;          // B
  int sequence_length = 50;     // L
  double model_learning_rate = 1e-4;
  int model_hidden = 64;
  double unsafe_class_weight = 10.0;
  // swag
  int burn_in_steps = 500;
  int period_steps = 200;
  int swag_models = 20;
  double swag_decay = 0.8;
  double cyclic_lr_factor = 5.0;
  int cyclic_lr_period = 200;
  int posterior_samples = 5;    // N
  // safety
  double safety_critic_learning_rate = 2e-4;
  double initial_penalty = 5e-9;       // mu_0
  double initial_lagrangian = 1e-6;    // lambda_0
  double penalty_power_factor = 1e-5;  // mu growth rate per gradient step
  double safety_discount_factor = 0.995;
  // general
  int update_steps = 100;       // U
  double critic_learning_rate = 8e-5;
  double policy_learning_rate = 8e-5;
  int action_repeat = 2;
  double discount_factor = 0.99;
  double td_lambda_factor = 0.95;
  int sequence_horizon = 15;    // H
  int net_hidden = 64;

  // agent / run control
  int episodes = 200;
  int warmup_episodes = 5;
  int eval_episodes = 10;       // E
  int eval_horizon = 1000;      // T_ep for evaluation
  bool deterministic_eval = true;
  double threshold = 25.0;      // d (single constraint)

  // env parameters
  int grid_width = 8;
  double grid_slip = 0.1;
  int env_horizon = 64;

  static AgentConfig desk_grid();    // gridworld desk-scale preset
  static AgentConfig desk_point();   // PointHazard2D desk-scale preset
  static AgentConfig paper_scale();  // Table-1 values, used for accounting checks

  void apply(const KeyValueConfig& kv);
  KeyValueConfig to_key_values() const;
};

AgentMode parse_mode(const std::string& name);
std::string mode_name(AgentMode mode);

}  // namespace config
}  // namespace lambdacore
