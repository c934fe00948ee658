#include "lambdacore/lp_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace lambdacore {
namespace lp_oracle {

namespace {

constexpr double kEps = 1e-9;

// Tableau simplex, Bland's rule. Variables: structural | slack | artificial.
class SimplexTableau {
 public:
  SimplexTableau(const LpProblem& lp) {
    n_ = lp.n;
    m_ = static_cast<int>(lp.eq_rows.size() + lp.ub_rows.size());
    n_slack_ = static_cast<int>(lp.ub_rows.size());
    n_art_ = m_;  // one artificial per row keeps the basis logic uniform
    cols_ = n_ + n_slack_ + n_art_ + 1;
    tab_.assign(m_, std::vector<double>(cols_, 0.0));
    basis_.assign(m_, -1);

    int row = 0;
    for (size_t i = 0; i < lp.eq_rows.size(); ++i, ++row) {
      for (int j = 0; j < n_; ++j) tab_[row][j] = lp.eq_rows[i][j];
      tab_[row][cols_ - 1] = lp.eq_rhs[i];
    }
    for (size_t i = 0; i < lp.ub_rows.size(); ++i, ++row) {
      for (int j = 0; j < n_; ++j) tab_[row][j] = lp.ub_rows[i][j];
      tab_[row][n_ + static_cast<int>(i)] = 1.0;
      tab_[row][cols_ - 1] = lp.ub_rhs[i];
    }
    for (int i = 0; i < m_; ++i) {
      if (tab_[i][cols_ - 1] < 0.0)
        for (auto& v : tab_[i]) v = -v;
      tab_[i][n_ + n_slack_ + i] = 1.0;
      basis_[i] = n_ + n_slack_ + i;
    }
  }

  bool phase1() {
    // Minimize sum of artificials == maximize -sum.
    std::vector<double> cost(cols_ - 1, 0.0);
    for (int j = n_ + n_slack_; j < cols_ - 1; ++j) cost[j] = -1.0;
    run(cost, cols_ - 1);
    double art_sum = 0.0;
    for (int i = 0; i < m_; ++i)
      if (basis_[i] >= n_ + n_slack_) art_sum += tab_[i][cols_ - 1];
    if (art_sum > 1e-7) return false;
    // Pivot remaining artificials out of the basis where possible.
    for (int i = 0; i < m_; ++i) {
      if (basis_[i] < n_ + n_slack_) continue;
      for (int j = 0; j < n_ + n_slack_; ++j) {
        if (std::abs(tab_[i][j]) > kEps) {
          pivot(i, j);
          break;
        }
      }
    }
    return true;
  }

  double phase2(const std::vector<double>& objective) {
    std::vector<double> cost(cols_ - 1, 0.0);
    for (int j = 0; j < n_; ++j) cost[j] = objective[j];
    run(cost, n_ + n_slack_);  // artificials stay out
    double value = 0.0;
    for (int i = 0; i < m_; ++i)
      if (basis_[i] < n_) value += objective[basis_[i]] * tab_[i][cols_ - 1];
    return value;
  }

  bool bounded() const { return bounded_; }

  std::vector<double> solution() const {
    std::vector<double> x(n_, 0.0);
    for (int i = 0; i < m_; ++i)
      if (basis_[i] < n_) x[basis_[i]] = tab_[i][cols_ - 1];
    return x;
  }

 private:
  void run(const std::vector<double>& cost, int n_usable) {
    // Reduced costs maintained implicitly: z_j - c_j from the current basis.
    while (true) {
      int enter = -1;
      for (int j = 0; j < n_usable; ++j) {  // Bland: lowest eligible index
        if (is_basic(j)) continue;
        double red = cost[j];
        for (int i = 0; i < m_; ++i)
          if (basis_[i] < static_cast<int>(cost.size())) red -= cost[basis_[i]] * tab_[i][j];
        if (red > kEps) {
          enter = j;
          break;
        }
      }
      if (enter < 0) return;
      int leave = -1;
      double best_ratio = std::numeric_limits<double>::infinity();
      for (int i = 0; i < m_; ++i) {
        if (tab_[i][enter] > kEps) {
          double ratio = tab_[i][cols_ - 1] / tab_[i][enter];
          if (ratio < best_ratio - kEps ||
              (ratio < best_ratio + kEps && (leave < 0 || basis_[i] < basis_[leave]))) {
            best_ratio = ratio;
            leave = i;
          }
        }
      }
      if (leave < 0) {
        bounded_ = false;
        return;
      }
      pivot(leave, enter);
    }
  }

  bool is_basic(int j) const {
    return std::find(basis_.begin(), basis_.end(), j) != basis_.end();
  }

  void pivot(int row, int col) {
    double piv = tab_[row][col];
    for (auto& v : tab_[row]) v /= piv;
    for (int i = 0; i < m_; ++i) {
      if (i == row) continue;
      double f = tab_[i][col];
      if (f == 0.0) continue;
      for (int j = 0; j < cols_; ++j) tab_[i][j] -= f * tab_[row][j];
    }
    basis_[row] = col;
  }

  int n_, m_, n_slack_, n_art_, cols_;
  std::vector<std::vector<double>> tab_;
  std::vector<int> basis_;
  bool bounded_ = true;
};

}  // namespace

LpResult solve_lp(const LpProblem& lp) {
  LpResult out;
  SimplexTableau tableau(lp);
  if (!tableau.phase1()) return out;  // infeasible
  out.value = tableau.phase2(lp.objective);
  out.bounded = tableau.bounded();
  out.feasible = true;
  out.x = tableau.solution();
  return out;
}

TimePolicy TimePolicy::uniform(int horizon, int n_states, int n_actions) {
  TimePolicy pi;
  pi.horizon = horizon;
  pi.n_states = n_states;
  pi.n_actions = n_actions;
  pi.p.assign(static_cast<size_t>(horizon) * n_states * n_actions, 1.0 / n_actions);
  return pi;
}

OccupancyLpSolution solve_cmdp_lp(const envs::TabularCmdp& cmdp) {
  cmdp.validate();
  const int S = cmdp.n_states, A = cmdp.n_actions, T = cmdp.horizon;
  const int C = cmdp.n_constraints();
  const int n = T * S * A;
  auto var = [S, A](int t, int s, int a) { return (t * S + s) * A + a; };

  LpProblem lp;
  lp.n = n;
  lp.objective.assign(n, 0.0);
  for (int t = 0; t < T; ++t)
    for (int s = 0; s < S; ++s)
      for (int a = 0; a < A; ++a) lp.objective[var(t, s, a)] = cmdp.reward(s, a);

  // Initial distribution: sum_a mu[0,s,a] = rho0(s).
  for (int s = 0; s < S; ++s) {
    std::vector<double> row(n, 0.0);
    for (int a = 0; a < A; ++a) row[var(0, s, a)] = 1.0;
    lp.eq_rows.push_back(std::move(row));
    lp.eq_rhs.push_back(cmdp.rho0[s]);
  }
  // Flow conservation between consecutive steps.
  for (int t = 0; t + 1 < T; ++t)
    for (int s2 = 0; s2 < S; ++s2) {
      std::vector<double> row(n, 0.0);
      for (int a = 0; a < A; ++a) row[var(t + 1, s2, a)] = 1.0;
      for (int s = 0; s < S; ++s)
        for (int a = 0; a < A; ++a) row[var(t, s, a)] -= cmdp.p(s, a, s2);
      lp.eq_rows.push_back(std::move(row));
      lp.eq_rhs.push_back(0.0);
    }
  // Expected cost bounds.
  for (int i = 0; i < C; ++i) {
    std::vector<double> row(n, 0.0);
    for (int t = 0; t < T; ++t)
      for (int s = 0; s < S; ++s)
        for (int a = 0; a < A; ++a) row[var(t, s, a)] = cmdp.cost(i, s, a);
    lp.ub_rows.push_back(std::move(row));
    lp.ub_rhs.push_back(cmdp.d.at(i));
  }

  LpResult res = solve_lp(lp);
  OccupancyLpSolution sol;
  sol.feasible = res.feasible;
  if (!res.feasible) return sol;
  sol.optimal_value = res.value;
  sol.occupancy = res.x;
  sol.constraint_values.assign(C, 0.0);
  for (int i = 0; i < C; ++i)
    for (int v = 0; v < n; ++v) sol.constraint_values[i] += lp.ub_rows[i][v] * res.x[v];

  sol.policy.horizon = T;
  sol.policy.n_states = S;
  sol.policy.n_actions = A;
  sol.policy.p.assign(static_cast<size_t>(T) * S * A, 0.0);
  for (int t = 0; t < T; ++t)
    for (int s = 0; s < S; ++s) {
      double total = 0.0;
      for (int a = 0; a < A; ++a) total += res.x[var(t, s, a)];
      for (int a = 0; a < A; ++a)
        sol.policy.at(t, s, a) = total > kEps ? res.x[var(t, s, a)] / total : 1.0 / A;
    }
  return sol;
}

PolicyValue exact_policy_eval(const envs::TabularCmdp& cmdp, const TimePolicy& policy) {
  const int S = cmdp.n_states, A = cmdp.n_actions, T = cmdp.horizon;
  PolicyValue out;
  out.Jc.assign(cmdp.n_constraints(), 0.0);
  std::vector<double> dist = cmdp.rho0;
  for (int t = 0; t < T; ++t) {
    std::vector<double> next(S, 0.0);
    for (int s = 0; s < S; ++s) {
      if (dist[s] == 0.0) continue;
      for (int a = 0; a < A; ++a) {
        double w = dist[s] * policy.at(t, s, a);
        if (w == 0.0) continue;
        out.J += w * cmdp.reward(s, a);
        for (int i = 0; i < cmdp.n_constraints(); ++i) out.Jc[i] += w * cmdp.cost(i, s, a);
        for (int s2 = 0; s2 < S; ++s2) next[s2] += w * cmdp.p(s, a, s2);
      }
    }
    dist = std::move(next);
  }
  return out;
}

double scalarized_dp_value(const envs::TabularCmdp& cmdp, double lam) {
  const int S = cmdp.n_states, A = cmdp.n_actions, T = cmdp.horizon;
  const int C = cmdp.n_constraints();
  std::vector<double> v(S, 0.0);
  for (int t = T - 1; t >= 0; --t) {
    std::vector<double> nv(S);
    for (int s = 0; s < S; ++s) {
      double best = -std::numeric_limits<double>::infinity();
      for (int a = 0; a < A; ++a) {
        double q = cmdp.reward(s, a);
        for (int i = 0; i < C; ++i) q -= lam * cmdp.cost(i, s, a);
        for (int s2 = 0; s2 < S; ++s2) {
          double pv = cmdp.p(s, a, s2);
          if (pv > 0.0) q += pv * v[s2];
        }
        best = std::max(best, q);
      }
      nv[s] = best;
    }
    v = std::move(nv);
  }
  double out = 0.0;
  for (int s = 0; s < S; ++s) out += cmdp.rho0[s] * v[s];
  return out;
}

double constrained_optimum_dual(const envs::TabularCmdp& cmdp, double lambda_hi, int iters) {
  if (cmdp.n_constraints() != 1)
    throw std::invalid_argument("constrained_optimum_dual supports a single constraint");
  double d = cmdp.d.at(0);
  auto g = [&](double lam) { return scalarized_dp_value(cmdp, lam) + lam * d; };
  // g is convex piecewise linear in lambda; ternary search.
  double lo = 0.0, hi = lambda_hi;
  for (int i = 0; i < iters; ++i) {
    double a = lo + (hi - lo) / 3.0;
    double b = hi - (hi - lo) / 3.0;
    if (g(a) <= g(b))
      hi = b;
    else
      lo = a;
  }
  return std::min(g(lo), std::min(g(0.5 * (lo + hi)), g(hi)));
}

}  // namespace lp_oracle
}  // namespace lambdacore
