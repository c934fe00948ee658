#include "lambdacore/cmdp.hpp"

#include <json.hpp>
#include <stdexcept>

namespace lambdacore {
namespace cmdp {

std::string MetricsReport::to_json() const {
  nlohmann::json j;
  j["J"] = J_hat;
  j["Jc"] = Jc_hat;
  j["rho_c"] = cost_regret;
  j["steps"] = steps;
  return j.dump();
}

void ReplayBuffer::add_episode(Episode ep) {
  if (ep.empty()) throw std::invalid_argument("ReplayBuffer: empty episode");
  n_transitions_ += ep.size();
  episodes_.push_back(std::move(ep));
  while (capacity_ > 0 && episodes_.size() > capacity_) {
    n_transitions_ -= episodes_.front().size();
    episodes_.erase(episodes_.begin());
  }
}

std::vector<TransitionRecord> ReplayBuffer::sample_sequence(int len, Rng& rng) const {
  if (len < 1) throw std::invalid_argument("sample_sequence: len must be >= 1");
  // Uniform over all valid (episode, start) pairs.
  long total_starts = 0;
  for (const auto& ep : episodes_)
    if (static_cast<int>(ep.size()) >= len) total_starts += static_cast<long>(ep.size()) - len + 1;
  if (total_starts == 0)
    throw std::runtime_error("sample_sequence: no episode of length >= " + std::to_string(len));
  long pick = static_cast<long>(rng.uniform() * total_starts) % total_starts;
  for (const auto& ep : episodes_) {
    if (static_cast<int>(ep.size()) < len) continue;
    long starts = static_cast<long>(ep.size()) - len + 1;
    if (pick < starts)
      return std::vector<TransitionRecord>(ep.begin() + pick, ep.begin() + pick + len);
    pick -= starts;
  }
  throw std::logic_error("sample_sequence: unreachable");
}

double episodic_return(const Episode& episode) {
  if (episode.empty()) throw std::invalid_argument("episodic_return: empty episode");
  double s = 0.0;
  for (const auto& t : episode) s += t.reward;
  return s;
}

double episodic_cost_return(const Episode& episode, int constraint) {
  if (episode.empty()) throw std::invalid_argument("episodic_cost_return: empty episode");
  double s = 0.0;
  for (const auto& t : episode) s += t.costs.at(constraint);
  return s;
}

MetricsReport evaluate_policy(Env& env, const PolicyFn& policy, int n_episodes, int t_ep, Rng& rng) {
  if (n_episodes < 1) throw std::invalid_argument("evaluate_policy: need n_episodes >= 1");
  MetricsReport report;
  report.Jc_hat.assign(env.n_constraints(), 0.0);
  for (int e = 0; e < n_episodes; ++e) {
    std::vector<double> s = env.reset(rng);
    for (int t = 0; t < t_ep; ++t) {
      StepResult r = env.step(policy(s, rng), rng);
      report.J_hat += r.reward;
      for (int i = 0; i < env.n_constraints(); ++i) report.Jc_hat[i] += r.costs[i];
      s = r.next_state;
      if (r.terminal) break;
    }
  }
  report.J_hat /= n_episodes;
  for (auto& v : report.Jc_hat) v /= n_episodes;
  return report;
}

double cost_regret(const std::vector<double>& training_costs, long total_steps) {
  if (total_steps <= 0) throw std::invalid_argument("cost_regret: total_steps must be > 0");
  double s = 0.0;
  for (double c : training_costs) s += c;
  return s / static_cast<double>(total_steps);
}

NormalizedMetrics normalize_metrics(const MetricsReport& raw, const MetricsReport& characteristic,
                                    const Thresholds& d) {
  if (characteristic.J_hat == 0.0) throw std::invalid_argument("normalize_metrics: reference J is zero");
  if (characteristic.cost_regret == 0.0)
    throw std::invalid_argument("normalize_metrics: reference rho_c is zero");
  NormalizedMetrics out;
  out.J_bar = raw.J_hat / characteristic.J_hat;
  out.Jc_bar.resize(raw.Jc_hat.size());
  for (size_t i = 0; i < raw.Jc_hat.size(); ++i) {
    double num = std::max(0.0, raw.Jc_hat[i] - d.d.at(i));
    double den = std::max(1e-6, characteristic.Jc_hat.at(i) - d.d.at(i));
    out.Jc_bar[i] = num / den;
  }
  out.rho_bar = raw.cost_regret / characteristic.cost_regret;
  return out;
}

}  // namespace cmdp
}  // namespace lambdacore
