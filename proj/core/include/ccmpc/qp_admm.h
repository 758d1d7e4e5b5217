// Copyright 2026 The ccmpc Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef CCMPC_QP_ADMM_H_
#define CCMPC_QP_ADMM_H_

#include <Eigen/Dense>

namespace ccmpc {

// Dense convex QP with L1-softened general rows and hard variable bounds:
//
//   min  1/2 x'Px + q'x + sum_i w_i * dist(a_i'x, [l_i, u_i])
//   s.t. x_lo <= x <= x_hi
//
// A row with w_i == 0 is treated as hard. The L1 penalty is exact: when the
// rows are feasible and w_i exceeds the optimal multiplier, the minimizer
// satisfies them exactly.
struct DenseQp {
  Eigen::MatrixXd P;
  Eigen::VectorXd q;
  Eigen::MatrixXd A;
  Eigen::VectorXd l;
  Eigen::VectorXd u;
  Eigen::VectorXd soft_weight;
  Eigen::VectorXd x_lo;
  Eigen::VectorXd x_hi;
};

struct QpSettings {
  double rho = 0.1;
  double sigma = 1e-6;
  double alpha = 1.6;  // over-relaxation
  int max_iter = 500;
  double eps_abs = 1e-5;
  double eps_rel = 1e-5;
  int check_every = 5;
  int adapt_every = 25;
};

struct QpSolution {
  Eigen::VectorXd x;
  Eigen::VectorXd y;  // row multipliers, bound multipliers appended
  int iterations = 0;
  bool converged = false;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
};

// ADMM (operator splitting) on the augmented row set [A; I]. Deterministic:
// the result depends only on the inputs.
QpSolution SolveQp(const DenseQp& qp, const QpSettings& settings = {});

// Objective value including the soft-row penalties.
double QpObjective(const DenseQp& qp, const Eigen::VectorXd& x);

}  // namespace ccmpc

#endif  // CCMPC_QP_ADMM_H_
