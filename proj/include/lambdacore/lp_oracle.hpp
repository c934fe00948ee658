#pragma once

#include <vector>

#include "lambdacore/envs.hpp"

namespace lambdacore {
namespace lp_oracle {

// Time-dependent stochastic policy pi(a | s, t) for a finite-horizon CMDP.
struct TimePolicy {
  int horizon = 0;
  int n_states = 0;
  int n_actions = 0;
  std::vector<double> p;  // [T*S*A]

  double& at(int t, int s, int a) {
    return p[(static_cast<size_t>(t) * n_states + s) * n_actions + a];
  }
  double at(int t, int s, int a) const {
    return p[(static_cast<size_t>(t) * n_states + s) * n_actions + a];
  }
  static TimePolicy uniform(int horizon, int n_states, int n_actions);
};

struct OccupancyLpSolution {
  bool feasible = false;
  double optimal_value = 0.0;             // J*
  std::vector<double> constraint_values;  // J^i at the optimum
  std::vector<double> occupancy;          // mu[t*S*A + s*A + a]
  TimePolicy policy;                      // recovered from mu, uniform where mu vanishes
};

struct PolicyValue {
  double J = 0.0;
  std::vector<double> Jc;
};

// General dense LP, maximize obj subject to eq_rows * x = eq_rhs,
// ub_rows * x <= ub_rhs, x >= 0. Two-phase simplex with Bland's rule.
struct LpProblem {
  int n = 0;
  std::vector<std::vector<double>> eq_rows;
  std::vector<double> eq_rhs;
  std::vector<std::vector<double>> ub_rows;
  std::vector<double> ub_rhs;
  std::vector<double> objective;
};

struct LpResult {
  bool feasible = false;
  bool bounded = true;
  double value = 0.0;
  std::vector<double> x;
};

LpResult solve_lp(const LpProblem& lp);

// Exact finite-horizon CMDP solution via the occupancy-measure LP.
OccupancyLpSolution solve_cmdp_lp(const envs::TabularCmdp& cmdp);

// Exact policy evaluation by forward propagation of the state distribution.
PolicyValue exact_policy_eval(const envs::TabularCmdp& cmdp, const TimePolicy& policy);

// Exact optimal value for a single-constraint CMDP through the Lagrangian
// dual: J* = min_{lam >= 0} [ DP value of r - lam*c + lam*d ]. Agrees with
// solve_cmdp_lp by LP strong duality and scales to instances far beyond what
// the dense simplex can handle.
double constrained_optimum_dual(const envs::TabularCmdp& cmdp, double lambda_hi = 100.0,
                                int iters = 300);

// Finite-horizon DP value of the scalarized objective r - lam * c.
double scalarized_dp_value(const envs::TabularCmdp& cmdp, double lam);

}  // namespace lp_oracle
}  // namespace lambdacore
