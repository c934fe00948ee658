#include "lambdacore/config.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace lambdacore {
namespace config {

namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

}  // namespace

KeyValueConfig KeyValueConfig::parse(const std::string& text) {
  KeyValueConfig cfg;
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    if (t.front() == '[' && t.back() == ']') {
      section = trim(t.substr(1, t.size() - 2));
      continue;
    }
    size_t eq = t.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config line " + std::to_string(lineno) + ": expected key = value");
    std::string key = trim(t.substr(0, eq));
    std::string value = trim(t.substr(eq + 1));
    cfg.values_[section.empty() ? key : section + "." + key] = value;
  }
  return cfg;
}

KeyValueConfig KeyValueConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read config file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

std::string KeyValueConfig::get(const std::string& key, const std::string& fallback) const {
  auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

double KeyValueConfig::get(const std::string& key, double fallback) const {
  auto it = values_.find(key);
  return it == values_.end() ? fallback : std::stod(it->second);
}

int KeyValueConfig::get(const std::string& key, int fallback) const {
  auto it = values_.find(key);
  return it == values_.end() ? fallback : std::stoi(it->second);
}

bool KeyValueConfig::get(const std::string& key, bool fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  return it->second == "true" || it->second == "1" || it->second == "yes";
}

std::string KeyValueConfig::serialize() const {
  std::ostringstream out;
  std::string section;
  for (const auto& [key, value] : values_) {
    size_t dot = key.find('.');
    std::string sec = dot == std::string::npos ? "" : key.substr(0, dot);
    std::string name = dot == std::string::npos ? key : key.substr(dot + 1);
    if (sec != section) {
      out << "[" << sec << "]\n";
      section = sec;
    }
    out << name << " = " << value << "\n";
  }
  return out.str();
}

AgentConfig AgentConfig::desk_grid() {
  AgentConfig c;
  c.env_name = "grid8";
  c.threshold = 5.0;
  c.env_horizon = 64;
  c.eval_horizon = 64;
  c.episodes = 200;
  c.action_repeat = 1;
  // Update-loop volume scaled so one run fits in minutes on one core.
  c.batch_size = 8;
  c.sequence_length = 8;
  c.update_steps = 10;
  c.sequence_horizon = 8;
  c.posterior_samples = 5;
  c.net_hidden = 32;
  c.model_hidden = 32;
  // SWAG schedule scaled to the shorter run.
  c.burn_in_steps = 100;
  c.period_steps = 10;
  c.cyclic_lr_period = 10;
  // Learning rates and the Lagrangian schedule rescaled to bite within the
  // desk-scale update budget.
  c.model_learning_rate = 3e-3;
  c.critic_learning_rate = 1e-3;
  c.safety_critic_learning_rate = 2e-3;
  c.policy_learning_rate = 3e-3;
  c.initial_penalty = 0.02;
  c.initial_lagrangian = 0.01;
  c.penalty_power_factor = 2e-3;
  c.update_steps = 10;
  return c;
}

AgentConfig AgentConfig::desk_point() {
  AgentConfig c = desk_grid();
  c.env_name = "point2d";
  c.env_horizon = 200;
  c.eval_horizon = 200;
  c.episodes = 100;
  return c;
}

AgentConfig AgentConfig::paper_scale() { return AgentConfig{}; }

void AgentConfig::apply(const KeyValueConfig& kv) {
  env_name = kv.get("env.name", env_name);
  mode = parse_mode(kv.get("agent.mode", mode_name(mode)));
  seed = static_cast<uint64_t>(kv.get("agent.seed", static_cast<int>(seed)));

  batch_size = kv.get("world_model.batch_size", batch_size);
  sequence_length = kv.get("world_model.sequence_length", sequence_length);
  model_learning_rate = kv.get("world_model.learning_rate", model_learning_rate);
  model_hidden = kv.get("world_model.hidden", model_hidden);
  unsafe_class_weight = kv.get("world_model.unsafe_class_weight", unsafe_class_weight);

  burn_in_steps = kv.get("swag.burn_in_steps", burn_in_steps);
  period_steps = kv.get("swag.period_steps", period_steps);
  swag_models = kv.get("swag.models", swag_models);
  swag_decay = kv.get("swag.decay", swag_decay);
  cyclic_lr_factor = kv.get("swag.cyclic_lr_factor", cyclic_lr_factor);
  cyclic_lr_period = kv.get("swag.cyclic_lr_period", cyclic_lr_period);
  posterior_samples = kv.get("swag.posterior_samples", posterior_samples);

  safety_critic_learning_rate = kv.get("safety.safety_critic_learning_rate", safety_critic_learning_rate);
  initial_penalty = kv.get("safety.initial_penalty", initial_penalty);
  initial_lagrangian = kv.get("safety.initial_lagrangian", initial_lagrangian);
  penalty_power_factor = kv.get("safety.penalty_power_factor", penalty_power_factor);
  safety_discount_factor = kv.get("safety.safety_discount_factor", safety_discount_factor);

  update_steps = kv.get("general.update_steps", update_steps);
  critic_learning_rate = kv.get("general.critic_learning_rate", critic_learning_rate);
  policy_learning_rate = kv.get("general.policy_learning_rate", policy_learning_rate);
  action_repeat = kv.get("general.action_repeat", action_repeat);
  discount_factor = kv.get("general.discount_factor", discount_factor);
  td_lambda_factor = kv.get("general.td_lambda_factor", td_lambda_factor);
  sequence_horizon = kv.get("general.sequence_generation_horizon", sequence_horizon);
  net_hidden = kv.get("general.net_hidden", net_hidden);

  episodes = kv.get("agent.episodes", episodes);
  warmup_episodes = kv.get("agent.warmup_episodes", warmup_episodes);
  eval_episodes = kv.get("agent.eval_episodes", eval_episodes);
  eval_horizon = kv.get("agent.eval_horizon", eval_horizon);
  deterministic_eval = kv.get("agent.deterministic_eval", deterministic_eval);
  threshold = kv.get("agent.threshold", threshold);

  grid_width = kv.get("env.grid_width", grid_width);
  grid_slip = kv.get("env.slip", grid_slip);
  env_horizon = kv.get("env.horizon", env_horizon);
}

KeyValueConfig AgentConfig::to_key_values() const {
  KeyValueConfig kv;
  auto num = [](double v) {
    std::ostringstream out;
    out.precision(17);
    out << v;
    return out.str();
  };
  kv.set("env.name", env_name);
  kv.set("env.grid_width", std::to_string(grid_width));
  kv.set("env.slip", num(grid_slip));
  kv.set("env.horizon", std::to_string(env_horizon));
  kv.set("agent.mode", mode_name(mode));
  kv.set("agent.seed", std::to_string(seed));
  kv.set("agent.episodes", std::to_string(episodes));
  kv.set("agent.warmup_episodes", std::to_string(warmup_episodes));
  kv.set("agent.eval_episodes", std::to_string(eval_episodes));
  kv.set("agent.eval_horizon", std::to_string(eval_horizon));
  kv.set("agent.deterministic_eval", deterministic_eval ? "true" : "false");
  kv.set("agent.threshold", num(threshold));
  kv.set("world_model.batch_size", std::to_string(batch_size));
  kv.set("world_model.sequence_length", std::to_string(sequence_length));
  kv.set("world_model.learning_rate", num(model_learning_rate));
  kv.set("world_model.hidden", std::to_string(model_hidden));
  kv.set("world_model.unsafe_class_weight", num(unsafe_class_weight));
  kv.set("swag.burn_in_steps", std::to_string(burn_in_steps));
  kv.set("swag.period_steps", std::to_string(period_steps));
  kv.set("swag.models", std::to_string(swag_models));
  kv.set("swag.decay", num(swag_decay));
  kv.set("swag.cyclic_lr_factor", num(cyclic_lr_factor));
  kv.set("swag.cyclic_lr_period", std::to_string(cyclic_lr_period));
  kv.set("swag.posterior_samples", std::to_string(posterior_samples));
  kv.set("safety.safety_critic_learning_rate", num(safety_critic_learning_rate));
  kv.set("safety.initial_penalty", num(initial_penalty));
  kv.set("safety.initial_lagrangian", num(initial_lagrangian));
  kv.set("safety.penalty_power_factor", num(penalty_power_factor));
  kv.set("safety.safety_discount_factor", num(safety_discount_factor));
  kv.set("general.update_steps", std::to_string(update_steps));
  kv.set("general.critic_learning_rate", num(critic_learning_rate));
  kv.set("general.policy_learning_rate", num(policy_learning_rate));
  kv.set("general.action_repeat", std::to_string(action_repeat));
  kv.set("general.discount_factor", num(discount_factor));
  kv.set("general.td_lambda_factor", num(td_lambda_factor));
  kv.set("general.sequence_generation_horizon", std::to_string(sequence_horizon));
  kv.set("general.net_hidden", std::to_string(net_hidden));
  return kv;
}

AgentMode parse_mode(const std::string& name) {
  if (name == "lambda") return AgentMode::kLambda;
  if (name == "greedy") return AgentMode::kGreedy;
  if (name == "unsafe") return AgentMode::kUnsafe;
  throw std::invalid_argument("unknown agent mode: " + name);
}

std::string mode_name(AgentMode mode) {
  switch (mode) {
    case AgentMode::kLambda: return "lambda";
    case AgentMode::kGreedy: return "greedy";
    default: return "unsafe";
  }
}

}  // namespace config
}  // namespace lambdacore
