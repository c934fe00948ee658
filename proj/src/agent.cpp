#include "lambdacore/agent.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "lambdacore/rollout.hpp"

namespace lambdacore {
namespace agent {

using diff::Tensor;
using json = nlohmann::json;

namespace {

double max_cost(const std::vector<double>& costs) {
  double m = 0.0;
  for (double c : costs) m = std::max(m, c);
  return m;
}

void write_flat(const std::string& path, const std::vector<double>& flat) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  uint64_t n = flat.size();
  f.write(reinterpret_cast<const char*>(&n), sizeof(n));
  f.write(reinterpret_cast<const char*>(flat.data()), static_cast<std::streamsize>(n * sizeof(double)));
}

std::vector<double> read_flat(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open for reading: " + path);
  uint64_t n = 0;
  f.read(reinterpret_cast<char*>(&n), sizeof(n));
  std::vector<double> flat(n);
  f.read(reinterpret_cast<char*>(flat.data()), static_cast<std::streamsize>(n * sizeof(double)));
  if (!f) throw std::runtime_error("truncated parameter file: " + path);
  return flat;
}

}  // namespace

std::string EpisodeLog::to_json() const {
  json j;
  j["episode"] = episode;
  j["env_steps"] = env_steps;
  j["J"] = J;
  if (Jc.size() == 1)
    j["Jc"] = Jc[0];
  else
    j["Jc"] = Jc;
  j["rho_c"] = rho_c;
  if (lambda.size() == 1)
    j["lambda"] = lambda[0];
  else
    j["lambda"] = lambda;
  j["mu"] = mu;
  j["model_nll"] = model_nll;
  j["policy_loss"] = policy_loss;
  j["simulated_interactions"] = simulated_interactions;
  if (aborted) j["aborted"] = true;
  return j.dump();
}

long long simulated_interactions_per_episode(const config::AgentConfig& cfg) {
  return static_cast<long long>(cfg.batch_size) * cfg.sequence_length * cfg.sequence_horizon *
         cfg.posterior_samples * cfg.update_steps;
}

std::shared_ptr<cmdp::Env> make_env(const config::AgentConfig& cfg,
                                    std::shared_ptr<envs::GridEnv>* grid_out) {
  std::shared_ptr<cmdp::Env> env;
  if (cfg.env_name == "grid8" || cfg.env_name == "grid") {
    envs::GridConfig gc;
    gc.width = cfg.grid_width;
    gc.slip = cfg.grid_slip;
    gc.horizon = cfg.env_horizon;
    gc.threshold = cfg.threshold;
    auto grid = std::make_shared<envs::GridEnv>(envs::make_hazard_grid(gc));
    if (grid_out) *grid_out = grid;
    env = grid;
  } else if (cfg.env_name == "point") {
    envs::PointConfig pc;
    pc.horizon = cfg.env_horizon;
    pc.threshold = cfg.threshold;
    env = std::make_shared<envs::PointHazard2D>(pc);
  } else {
    throw std::invalid_argument("unknown environment: " + cfg.env_name);
  }
  if (cfg.action_repeat > 1) env = std::make_shared<envs::ActionRepeat>(env, cfg.action_repeat);
  return env;
}

Agent::Agent(const config::AgentConfig& cfg) : cfg_(cfg) {
  env_ = make_env(cfg_, &grid_);

  Rng root(cfg_.seed);
  Rng init_rng = root.split(0);
  rng_env_ = root.split(1);
  rng_train_ = root.split(2);
  rng_eval_ = root.split(3);

  world_model::ModelConfig mc;
  mc.state_dim = env_->state_dim();
  mc.action_dim = env_->action_dim();
  mc.n_constraints = env_->n_constraints();
  mc.hidden = cfg_.model_hidden;
  mc.unsafe_class_weight = cfg_.unsafe_class_weight;
  model_ = world_model::WorldModelParams(mc, init_rng);

  world_model::SwagConfig sc;
  sc.burn_in_steps = cfg_.burn_in_steps;
  sc.period_steps = cfg_.period_steps;
  sc.n_models = cfg_.swag_models;
  sc.decay = cfg_.swag_decay;
  sc.cyclic_lr_base = cfg_.model_learning_rate;
  sc.cyclic_lr_period = cfg_.cyclic_lr_period;
  sc.cyclic_lr_peak_factor = cfg_.cyclic_lr_factor;
  posterior_ = world_model::SwagPosterior(model_.to_flat().size(), sc);
  model_opt_ = std::make_unique<nn::Adam>(model_.params(), cfg_.model_learning_rate);

  critics::CriticConfig cc;
  cc.state_dim = env_->state_dim();
  cc.n_constraints = env_->n_constraints();
  cc.hidden = cfg_.net_hidden;
  cc.gamma = cfg_.discount_factor;
  cc.gamma_cost = cfg_.safety_discount_factor;
  cc.td_lambda = cfg_.td_lambda_factor;
  cc.shadow_clone_period = cfg_.update_steps;
  cc.task_lr = cfg_.critic_learning_rate;
  cc.safety_lr = cfg_.safety_critic_learning_rate;
  critics_ = critics::CriticSet(cc, init_rng);

  policy_ = constrained_opt::SquashedGaussianPolicy(env_->state_dim(), env_->action_dim(), init_rng,
                                                    cfg_.net_hidden);
  policy_opt_ = std::make_unique<nn::Adam>(policy_.params(), cfg_.policy_learning_rate);

  lagrange_ = constrained_opt::LagrangeState::init(env_->n_constraints(), cfg_.initial_lagrangian,
                                                   cfg_.initial_penalty, cfg_.penalty_power_factor);
}

void Agent::collect_episode(bool random_policy) {
  cmdp::Episode episode;
  std::vector<double> state = env_->reset(rng_env_);
  while (true) {
    std::vector<double> action;
    if (random_policy) {
      action.resize(env_->action_dim());
      for (auto& a : action) a = rng_env_.uniform(-1.0, 1.0);
    } else {
      action = policy_.act(state, rng_env_);
    }
    cmdp::StepResult res = env_->step(action, rng_env_);
    cmdp::TransitionRecord tr;
    tr.state = state;
    tr.action = action;
    tr.reward = res.reward;
    tr.costs = res.costs;
    tr.next_state = res.next_state;
    tr.terminal = res.terminal;
    episode.push_back(tr);
    training_cost_sum_ += max_cost(res.costs);
    training_interactions_ += 1;
    env_steps_ += cfg_.action_repeat;
    state = res.next_state;
    if (res.terminal) break;
  }
  replay_.add_episode(std::move(episode));
}

void Agent::ensure_warmup() {
  if (warmed_) return;
  for (int i = 0; i < cfg_.warmup_episodes; ++i) collect_episode(true);
  warmed_ = true;
}

void Agent::update_step() {
  const int n_constraints = env_->n_constraints();
  const bool use_max = cfg_.mode == config::AgentMode::kLambda;
  const bool use_safety = cfg_.mode != config::AgentMode::kUnsafe;

  std::vector<std::vector<cmdp::TransitionRecord>> batch;
  for (int b = 0; b < cfg_.batch_size; ++b)
    batch.push_back(replay_.sample_sequence(cfg_.sequence_length, rng_train_));

  auto model_res = world_model::model_train_step(model_, posterior_, batch, *model_opt_, rng_train_);
  last_model_loss_ = model_res.loss;

  Tensor roots = rollout::initial_states_from_batch(batch);
  auto models = ucb::draw_models(model_, posterior_, cfg_.posterior_samples, rng_train_);
  auto trajs = ucb::rollout_samples(models, policy_, roots, cfg_.sequence_horizon, rng_train_);
  for (const auto& traj : trajs)
    sim_interactions_ += static_cast<long long>(traj.n_steps()) * traj.n_roots();

  const int n_samples = static_cast<int>(trajs.size());
  std::vector<std::vector<Tensor>> task_targets(n_samples);
  std::vector<Tensor> task_cands;
  for (int j = 0; j < n_samples; ++j) {
    task_targets[j] = ucb::task_value_targets(trajs[j], critics_);
    task_cands.push_back(ucb::horizon_mean(task_targets[j]));
  }

  Tensor task_sel;
  std::vector<int> task_choice;  // empty => equal-weight mean selection
  if (use_max) {
    auto b = ucb::select_max(task_cands);
    task_sel = b.values;
    task_choice = b.chosen;
  } else {
    task_sel = ucb::select_mean(task_cands);
  }

  std::vector<std::vector<std::vector<Tensor>>> cost_targets(n_constraints);
  std::vector<Tensor> cost_sel;
  std::vector<std::vector<int>> cost_choice(n_constraints);
  if (use_safety) {
    for (int i = 0; i < n_constraints; ++i) {
      std::vector<Tensor> cands;
      cost_targets[i].resize(n_samples);
      for (int j = 0; j < n_samples; ++j) {
        cost_targets[i][j] = ucb::cost_value_targets(trajs[j], critics_, i);
        cands.push_back(ucb::horizon_mean(cost_targets[i][j]));
      }
      if (use_max) {
        auto b = ucb::select_max(cands);
        cost_sel.push_back(b.values);
        cost_choice[i] = b.chosen;
      } else {
        cost_sel.push_back(ucb::select_mean(cands));
      }
    }
  }

  // Critic regression on the per-root selected trajectories; with mean
  // selection every sample contributes with equal weight.
  const int n_roots = roots.rows();
  auto make_batch = [&](const std::vector<std::vector<Tensor>>& targets,
                        const std::vector<int>& chosen) {
    critics::CriticSet::RegressionBatch rb;
    for (int j = 0; j < static_cast<int>(targets.size()); ++j) {
      Mat w(n_roots, 1);
      if (chosen.empty()) {
        for (auto& v : w.d) v = 1.0;
      } else {
        bool any = false;
        for (int r = 0; r < n_roots; ++r)
          if (chosen[r] == j) {
            w.at(r, 0) = 1.0;
            any = true;
          }
        if (!any) continue;
      }
      for (int t = 0; t < static_cast<int>(targets[j].size()); ++t) {
        rb.states.push_back(trajs[j].states[t]);
        rb.targets.push_back(targets[j][t].value());
        rb.weights.push_back(w);
      }
    }
    return rb;
  };

  std::vector<critics::CriticSet::RegressionBatch> safety_batches;
  if (use_safety)
    for (int i = 0; i < n_constraints; ++i)
      safety_batches.push_back(make_batch(cost_targets[i], cost_choice[i]));
  critics_.train_step(make_batch(task_targets, task_choice), safety_batches);

  std::vector<double> d(n_constraints, cfg_.threshold);
  auto loss_res = constrained_opt::policy_loss(task_sel, cost_sel, lagrange_, d);
  policy_opt_->zero_grad();
  diff::backward(loss_res.loss);
  policy_opt_->step();
  last_policy_loss_ = loss_res.loss.scalar();

  if (use_safety) lagrange_ = constrained_opt::lambda_update(lagrange_, loss_res.jc_est, d);
}

EpisodeLog Agent::train_episode() {
  ensure_warmup();
  last_update_aborted_ = false;
  abort_diagnostic_.clear();
  for (int u = 0; u < cfg_.update_steps; ++u) {
    try {
      update_step();
    } catch (const std::exception& e) {
      last_update_aborted_ = true;
      abort_diagnostic_ = e.what();
      break;
    }
  }
  collect_episode(false);
  ++episode_index_;

  const cmdp::Episode& ep = replay_.episode(replay_.n_episodes() - 1);
  EpisodeLog log;
  log.episode = episode_index_;
  log.env_steps = env_steps_;
  log.J = cmdp::episodic_return(ep);
  for (int i = 0; i < env_->n_constraints(); ++i)
    log.Jc.push_back(cmdp::episodic_cost_return(ep, i));
  log.rho_c = training_interactions_ > 0 ? training_cost_sum_ / training_interactions_ : 0.0;
  log.lambda = lagrange_.lambda;
  log.mu = lagrange_.mu;
  log.model_nll = last_model_loss_;
  log.policy_loss = last_policy_loss_;
  log.simulated_interactions = sim_interactions_;
  log.aborted = last_update_aborted_;
  return log;
}

TrainResult Agent::train() {
  TrainResult result;
  for (int e = 0; e < cfg_.episodes; ++e) result.episodes.push_back(train_episode());
  result.final_eval = evaluate();
  result.simulated_interactions = sim_interactions_;
  return result;
}

cmdp::MetricsReport Agent::evaluate(int n_episodes, int t_ep) {
  cmdp::PolicyFn fn;
  if (cfg_.deterministic_eval)
    fn = [this](const std::vector<double>& s, Rng&) { return policy_.act_mean(s); };
  else
    fn = [this](const std::vector<double>& s, Rng& r) { return policy_.act(s, r); };
  cmdp::MetricsReport report = cmdp::evaluate_policy(*env_, fn, n_episodes, t_ep, rng_eval_);
  report.cost_regret = training_interactions_ > 0 ? training_cost_sum_ / training_interactions_ : 0.0;
  return report;
}

void Agent::save_checkpoint(const std::string& dir) const {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  write_flat(dir + "/model.bin", model_.to_flat());
  write_flat(dir + "/critics.bin", critics_.to_flat());
  write_flat(dir + "/policy.bin", policy_.to_flat());

  json lg;
  lg["lambda"] = lagrange_.lambda;
  lg["mu"] = lagrange_.mu;
  lg["mu_growth"] = lagrange_.mu_growth;
  std::ofstream(dir + "/lagrange.json") << lg.dump(2) << "\n";

  json mf;
  mf["env"] = cfg_.env_name;
  mf["mode"] = config::mode_name(cfg_.mode);
  mf["seed"] = cfg_.seed;
  mf["episode"] = episode_index_;
  mf["env_steps"] = env_steps_;
  mf["training_interactions"] = training_interactions_;
  mf["training_cost_sum"] = training_cost_sum_;
  mf["simulated_interactions"] = sim_interactions_;
  mf["model_params"] = model_.to_flat().size();
  mf["critic_params"] = critics_.to_flat().size();
  mf["policy_params"] = policy_.to_flat().size();
  std::ofstream(dir + "/manifest.json") << mf.dump(2) << "\n";
}

void Agent::load_checkpoint(const std::string& dir) {
  std::ifstream mff(dir + "/manifest.json");
  if (!mff) throw std::runtime_error("no manifest in checkpoint: " + dir);
  json mf = json::parse(mff);
  if (mf.at("env").get<std::string>() != cfg_.env_name)
    throw std::runtime_error("checkpoint environment mismatch");
  model_.from_flat(read_flat(dir + "/model.bin"));
  critics_.from_flat(read_flat(dir + "/critics.bin"));
  policy_.from_flat(read_flat(dir + "/policy.bin"));

  json lg = json::parse(std::ifstream(dir + "/lagrange.json"));
  lagrange_.lambda = lg.at("lambda").get<std::vector<double>>();
  lagrange_.mu = lg.at("mu").get<double>();
  lagrange_.mu_growth = lg.at("mu_growth").get<double>();

  episode_index_ = mf.at("episode").get<int>();
  env_steps_ = mf.at("env_steps").get<long>();
  training_interactions_ = mf.at("training_interactions").get<long>();
  training_cost_sum_ = mf.at("training_cost_sum").get<double>();
  sim_interactions_ = mf.at("simulated_interactions").get<long long>();
}

}  // namespace agent
}  // namespace lambdacore
