#include "lambdacore/envs.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace lambdacore {
namespace envs {

void TabularCmdp::validate() const {
  for (int s = 0; s < n_states; ++s)
    for (int a = 0; a < n_actions; ++a) {
      double sum = 0.0;
      for (int s2 = 0; s2 < n_states; ++s2) {
        double v = p(s, a, s2);
        if (v < 0.0) throw std::invalid_argument("TabularCmdp: negative transition probability");
        sum += v;
      }
      if (std::abs(sum - 1.0) > 1e-12)
        throw std::invalid_argument("TabularCmdp: row (" + std::to_string(s) + "," + std::to_string(a) +
                                    ") sums to " + std::to_string(sum));
    }
  double rsum = 0.0;
  for (double v : rho0) rsum += v;
  if (std::abs(rsum - 1.0) > 1e-12) throw std::invalid_argument("TabularCmdp: rho0 does not sum to 1");
}

namespace {

bool grid_hazard(int x, int y) { return x >= 2 && x <= 5 && (y == 3 || y == 4); }

}  // namespace

TabularCmdp make_hazard_grid(const GridConfig& cfg) {
  const int w = cfg.width;
  const int S = w * w;
  const int A = 4;
  TabularCmdp m;
  m.n_states = S;
  m.n_actions = A;
  m.horizon = cfg.horizon;
  m.P.assign(static_cast<size_t>(S) * A * S, 0.0);
  m.r.assign(static_cast<size_t>(S) * A, 0.0);
  m.c.assign(1, std::vector<double>(static_cast<size_t>(S) * A, 0.0));
  m.rho0.assign(S, 0.0);
  m.rho0[0] = 1.0;  // start at (0, 0)
  m.d = {cfg.threshold};

  const int goal = S - 1;  // (w-1, w-1)
  auto idx = [w](int x, int y) { return y * w + x; };
  const int dx[4] = {1, -1, 0, 0};
  const int dy[4] = {0, 0, 1, -1};

  for (int y = 0; y < w; ++y)
    for (int x = 0; x < w; ++x) {
      int s = idx(x, y);
      for (int a = 0; a < A; ++a) {
        if (s == goal) {
          m.r[static_cast<size_t>(s) * A + a] = cfg.goal_reward;
          m.p(s, a, goal) = 1.0;  // absorbing
          continue;
        }
        if (grid_hazard(x, y)) m.c[0][static_cast<size_t>(s) * A + a] = 1.0;
        for (int move = 0; move < A; ++move) {
          double prob = (move == a) ? (1.0 - cfg.slip) + cfg.slip / A : cfg.slip / A;
          int nx = std::clamp(x + dx[move], 0, w - 1);
          int ny = std::clamp(y + dy[move], 0, w - 1);
          m.p(s, a, idx(nx, ny)) += prob;
        }
      }
    }
  m.validate();
  return m;
}

GridEnv::GridEnv(TabularCmdp cmdp) : cmdp_(std::move(cmdp)) {
  width_ = static_cast<int>(std::lround(std::sqrt(static_cast<double>(cmdp_.n_states))));
  if (width_ * width_ != cmdp_.n_states) throw std::invalid_argument("GridEnv: non-square state count");
}

std::vector<double> GridEnv::observe(int s) const {
  double x = s % width_;
  double y = s / width_;
  double half = (width_ - 1) / 2.0;
  return {x / half - 1.0, y / half - 1.0};
}

int GridEnv::state_index(const std::vector<double>& obs) const {
  double half = (width_ - 1) / 2.0;
  int x = static_cast<int>(std::lround((obs.at(0) + 1.0) * half));
  int y = static_cast<int>(std::lround((obs.at(1) + 1.0) * half));
  x = std::clamp(x, 0, width_ - 1);
  y = std::clamp(y, 0, width_ - 1);
  return y * width_ + x;
}

int GridEnv::action_to_discrete(const std::vector<double>& a) {
  double ax = a.at(0), ay = a.at(1);
  if (std::abs(ax) >= std::abs(ay)) return ax >= 0.0 ? 0 : 1;
  return ay >= 0.0 ? 2 : 3;
}

std::vector<double> GridEnv::reset(Rng& rng) {
  state_ = rng.categorical(cmdp_.rho0);
  step_count_ = 0;
  return observe(state_);
}

cmdp::StepResult GridEnv::step(const std::vector<double>& action, Rng& rng) {
  cmdp::StepResult out;
  std::vector<double> clipped = action;
  for (auto& v : clipped) {
    if (v < -1.0 || v > 1.0) out.action_clipped = true;
    v = std::clamp(v, -1.0, 1.0);
  }
  int a = action_to_discrete(clipped);
  out.reward = cmdp_.reward(state_, a);
  out.costs.resize(cmdp_.n_constraints());
  for (int i = 0; i < cmdp_.n_constraints(); ++i) out.costs[i] = cmdp_.cost(i, state_, a);
  std::vector<double> row(cmdp_.n_states);
  for (int s2 = 0; s2 < cmdp_.n_states; ++s2) row[s2] = cmdp_.p(state_, a, s2);
  state_ = rng.categorical(row);
  ++step_count_;
  out.next_state = observe(state_);
  out.terminal = step_count_ >= cmdp_.horizon;
  return out;
}

PointHazard2D::PointHazard2D(PointConfig cfg) : cfg_(cfg) {
  goal_ = {1.5, 1.5};
  hazards_ = {{0.0, 0.0, 0.5}, {1.0, 0.5, 0.4}, {0.5, 1.0, 0.4}};
  pos_ = {-1.5, -1.5};
  vel_ = {0.0, 0.0};
}

bool PointHazard2D::in_hazard(double x, double y) const {
  for (const auto& h : hazards_) {
    double ddx = x - h[0], ddy = y - h[1];
    if (ddx * ddx + ddy * ddy <= h[2] * h[2]) return true;
  }
  return false;
}

std::vector<double> PointHazard2D::reset(Rng& rng) {
  pos_ = {-1.5 + 0.1 * rng.uniform(), -1.5 + 0.1 * rng.uniform()};
  vel_ = {0.0, 0.0};
  step_count_ = 0;
  return {pos_[0], pos_[1], vel_[0], vel_[1]};
}

cmdp::StepResult PointHazard2D::step(const std::vector<double>& action, Rng& rng) {
  cmdp::StepResult out;
  std::vector<double> a = action;
  for (auto& v : a) {
    if (v < -1.0 || v > 1.0) out.action_clipped = true;
    v = std::clamp(v, -1.0, 1.0);
  }
  double d_before = std::hypot(goal_[0] - pos_[0], goal_[1] - pos_[1]);
  for (int i = 0; i < 2; ++i) {
    pos_[i] = std::clamp(pos_[i] + cfg_.dt * vel_[i], -cfg_.arena, cfg_.arena);
    vel_[i] = std::clamp(vel_[i] + cfg_.dt * a[i] + cfg_.noise_scale * rng.normal(),
                         -cfg_.vel_limit, cfg_.vel_limit);
  }
  double d_after = std::hypot(goal_[0] - pos_[0], goal_[1] - pos_[1]);
  out.reward = d_before - d_after;
  if (d_after <= cfg_.goal_radius) out.reward += cfg_.goal_bonus;
  out.costs = {in_hazard(pos_[0], pos_[1]) ? 1.0 : 0.0};
  ++step_count_;
  out.next_state = {pos_[0], pos_[1], vel_[0], vel_[1]};
  out.terminal = step_count_ >= cfg_.horizon;
  return out;
}

ActionRepeat::ActionRepeat(std::shared_ptr<cmdp::Env> inner, int k) : inner_(std::move(inner)), k_(k) {
  if (k_ < 1) throw std::invalid_argument("ActionRepeat: k must be >= 1");
}

cmdp::StepResult ActionRepeat::step(const std::vector<double>& action, Rng& rng) {
  cmdp::StepResult agg;
  for (int i = 0; i < k_; ++i) {
    cmdp::StepResult r = inner_->step(action, rng);
    agg.reward += r.reward;
    if (agg.costs.empty()) agg.costs.assign(r.costs.size(), 0.0);
    for (size_t j = 0; j < r.costs.size(); ++j) agg.costs[j] = std::max(agg.costs[j], r.costs[j]);
    agg.next_state = r.next_state;
    agg.action_clipped = agg.action_clipped || r.action_clipped;
    agg.terminal = r.terminal;
    if (r.terminal) break;
  }
  return agg;
}

}  // namespace envs
}  // namespace lambdacore
