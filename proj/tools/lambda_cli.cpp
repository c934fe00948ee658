#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "json.hpp"
#include "lambdacore/agent.hpp"
#include "lambdacore/lp_oracle.hpp"
#include "lambdacore/reporting.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace lambdacore;

namespace {

enum class LogLevel { kDebug = 0, kInfo = 1, kWarn = 2, kError = 3 };

LogLevel log_level() {
  const char* raw = std::getenv("LAMBDA_CORE_LOG");
  if (!raw) return LogLevel::kInfo;
  std::string v(raw);
  if (v == "debug") return LogLevel::kDebug;
  if (v == "warn") return LogLevel::kWarn;
  if (v == "error") return LogLevel::kError;
  return LogLevel::kInfo;
}

void log_info(const std::string& msg) {
  if (log_level() <= LogLevel::kInfo) std::cerr << "[lambda] " << msg << "\n";
}

struct RunOptions {
  std::string env = "grid8";
  uint64_t seed = 0;
  int episodes = -1;
  std::string config_path;
  std::string out_dir;
  int eval_episodes = -1;
  bool deterministic_eval = true;
  std::string mode = "lambda";
};

config::AgentConfig resolve_config(const RunOptions& opt) {
  config::AgentConfig cfg =
      opt.env == "point" ? config::AgentConfig::desk_point() : config::AgentConfig::desk_grid();
  cfg.env_name = opt.env;
  if (!opt.config_path.empty()) cfg.apply(config::KeyValueConfig::load(opt.config_path));
  cfg.seed = opt.seed;
  cfg.mode = config::parse_mode(opt.mode);
  if (opt.episodes >= 0) cfg.episodes = opt.episodes;
  if (opt.eval_episodes >= 0) cfg.eval_episodes = opt.eval_episodes;
  cfg.deterministic_eval = opt.deterministic_eval;
  return cfg;
}

void add_run_flags(CLI::App* cmd, RunOptions& opt) {
  cmd->add_option("--env", opt.env, "environment name (grid8, point)");
  cmd->add_option("--seed", opt.seed, "random seed");
  cmd->add_option("--config", opt.config_path, "key = value config file");
  cmd->add_option("--eval-episodes", opt.eval_episodes, "evaluation episodes E");
  cmd->add_flag("--deterministic-eval,!--stochastic-eval", opt.deterministic_eval,
                "evaluate with the mean action");
  cmd->add_option("--mode", opt.mode, "agent variant: lambda, greedy, unsafe");
}

int cmd_train(const RunOptions& opt) {
  if (opt.out_dir.empty()) throw CLI::ValidationError("--out is required for train");
  config::AgentConfig cfg = resolve_config(opt);
  fs::create_directories(opt.out_dir);
  if (fs::exists(fs::path(opt.out_dir) / "scores.json"))
    throw CLI::ValidationError("output directory already holds a completed run: " + opt.out_dir);

  std::ofstream(fs::path(opt.out_dir) / "config.txt") << cfg.to_key_values().serialize();

  agent::Agent a(cfg);
  std::ofstream metrics(fs::path(opt.out_dir) / "metrics.jsonl");
  log_info("training " + cfg.env_name + " seed " + std::to_string(cfg.seed) + " for " +
           std::to_string(cfg.episodes) + " episodes");
  for (int e = 0; e < cfg.episodes; ++e) {
    agent::EpisodeLog log = a.train_episode();
    metrics << log.to_json() << "\n";
    metrics.flush();
    if (log.aborted) log_info("episode " + std::to_string(log.episode) + ": update loop aborted");
  }
  cmdp::MetricsReport report = a.evaluate();
  std::ofstream(fs::path(opt.out_dir) / "scores.json") << report.to_json() << "\n";
  a.save_checkpoint((fs::path(opt.out_dir) / "checkpoint").string());
  log_info("final J=" + std::to_string(report.J_hat) +
           " Jc=" + std::to_string(report.Jc_hat.empty() ? 0.0 : report.Jc_hat[0]) +
           " rho_c=" + std::to_string(report.cost_regret));
  return 0;
}

int cmd_eval(const RunOptions& opt, const std::string& checkpoint) {
  config::AgentConfig cfg = resolve_config(opt);
  agent::Agent a(cfg);
  if (!checkpoint.empty()) a.load_checkpoint(checkpoint);
  cmdp::MetricsReport report = a.evaluate();
  std::cout << report.to_json() << "\n";
  if (!opt.out_dir.empty()) {
    fs::create_directories(opt.out_dir);
    std::ofstream(fs::path(opt.out_dir) / "scores.json") << report.to_json() << "\n";
  }
  return 0;
}

envs::TabularCmdp load_tabular(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot read CMDP file: " + path);
  json j = json::parse(f);
  envs::TabularCmdp m;
  m.n_states = j.at("n_states").get<int>();
  m.n_actions = j.at("n_actions").get<int>();
  m.P = j.at("P").get<std::vector<double>>();
  m.r = j.at("r").get<std::vector<double>>();
  m.c = j.at("c").get<std::vector<std::vector<double>>>();
  m.rho0 = j.at("rho0").get<std::vector<double>>();
  m.horizon = j.at("horizon").get<int>();
  m.d = j.at("d").get<std::vector<double>>();
  m.validate();
  return m;
}

int cmd_lp_solve(const std::string& path) {
  envs::TabularCmdp m = load_tabular(path);
  lp_oracle::OccupancyLpSolution sol = lp_oracle::solve_cmdp_lp(m);
  json out;
  out["feasible"] = sol.feasible;
  if (sol.feasible) {
    out["optimal_value"] = sol.optimal_value;
    out["constraint_values"] = sol.constraint_values;
  }
  std::cout << out.dump(2) << "\n";
  return sol.feasible ? 0 : 1;
}

int cmd_report(const std::vector<std::string>& run_dirs, const std::string& out_dir) {
  std::vector<std::vector<reporting::MetricsRow>> runs;
  for (const auto& dir : run_dirs) {
    fs::path p(dir);
    if (fs::is_directory(p)) p /= "metrics.jsonl";
    runs.push_back(reporting::load_metrics_file(p.string()));
  }
  auto bands = reporting::aggregate_runs(runs);
  json summary;
  for (const auto& [metric, band] : bands) {
    if (band.mean.empty()) continue;
    summary[metric] = {{"final_mean", band.mean.back()},
                       {"final_p5", band.p5.back()},
                       {"final_p95", band.p95.back()}};
    if (!out_dir.empty()) {
      fs::create_directories(out_dir);
      reporting::write_plot_csv((fs::path(out_dir) / (metric + ".csv")).string(), band);
    }
  }
  std::cout << summary.dump(2) << "\n";
  return 0;
}

int cmd_normalize(const std::string& raw_path, const std::string& ref_path, double d) {
  auto load_report = [](const std::string& path) {
    json j = json::parse(std::ifstream(path));
    cmdp::MetricsReport r;
    r.J_hat = j.at("J").get<double>();
    if (j.at("Jc").is_array())
      r.Jc_hat = j.at("Jc").get<std::vector<double>>();
    else
      r.Jc_hat = {j.at("Jc").get<double>()};
    r.cost_regret = j.at("rho_c").get<double>();
    r.steps = j.value("steps", 0L);
    return r;
  };
  cmdp::MetricsReport raw = load_report(raw_path);
  cmdp::MetricsReport ref = load_report(ref_path);
  cmdp::Thresholds thresholds;
  thresholds.d.assign(raw.Jc_hat.size(), d);
  cmdp::NormalizedMetrics n = cmdp::normalize_metrics(raw, ref, thresholds);
  json out;
  out["J_bar"] = n.J_bar;
  out["Jc_bar"] = n.Jc_bar.size() == 1 ? json(n.Jc_bar[0]) : json(n.Jc_bar);
  out["rho_bar"] = n.rho_bar;
  std::cout << out.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Constrained model-based RL experiment runner"};
  app.require_subcommand(1);

  RunOptions train_opt;
  CLI::App* train = app.add_subcommand("train", "run the training loop");
  add_run_flags(train, train_opt);
  train->add_option("--episodes", train_opt.episodes, "outer training iterations");
  train->add_option("--out", train_opt.out_dir, "output directory")->required();

  RunOptions eval_opt;
  std::string checkpoint;
  CLI::App* eval = app.add_subcommand("eval", "evaluate a checkpoint");
  add_run_flags(eval, eval_opt);
  eval->add_option("--checkpoint", checkpoint, "checkpoint directory to load");
  eval->add_option("--out", eval_opt.out_dir, "optional output directory for scores.json");

  std::string lp_file;
  CLI::App* lp = app.add_subcommand("lp-solve", "solve a tabular CMDP exactly");
  lp->add_option("file", lp_file, "CMDP description (JSON)")->required();

  std::vector<std::string> report_dirs;
  std::string report_out;
  CLI::App* report = app.add_subcommand("report", "aggregate per-seed metric logs");
  report->add_option("runs", report_dirs, "run directories or metrics files")->required();
  report->add_option("--out", report_out, "directory for per-metric CSV bands");

  std::string norm_raw, norm_ref;
  double norm_d = 25.0;
  CLI::App* norm = app.add_subcommand("normalize", "normalize scores against a reference agent");
  norm->add_option("--scores", norm_raw, "scores.json of the run")->required();
  norm->add_option("--reference", norm_ref, "scores.json of the characteristic agent")->required();
  norm->add_option("--d", norm_d, "constraint threshold");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*train) return cmd_train(train_opt);
    if (*eval) return cmd_eval(eval_opt, checkpoint);
    if (*lp) return cmd_lp_solve(lp_file);
    if (*report) return cmd_report(report_dirs, report_out);
    if (*norm) return cmd_normalize(norm_raw, norm_ref, norm_d);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
