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

#include "ccmpc/qp_admm.h"

#include <algorithm>
#include <cmath>

#include "ccmpc/core_types.h"

namespace ccmpc {
namespace {

// Proximal operator of (w / rho) * dist(., [l, u]), or projection when w == 0.
double SoftProx(double v, double l, double u, double w, double rho) {
  if (w <= 0.0) return std::clamp(v, l, u);
  const double shift = w / rho;
  if (v < l) return std::min(v + shift, l);
  if (v > u) return std::max(v - shift, u);
  return v;
}

double InfNorm(const Eigen::VectorXd& v) {
  return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff();
}

}  // namespace

double QpObjective(const DenseQp& qp, const Eigen::VectorXd& x) {
  double f = 0.5 * x.dot(qp.P * x) + qp.q.dot(x);
  if (qp.A.rows() > 0) {
    const Eigen::VectorXd ax = qp.A * x;
    for (int i = 0; i < ax.size(); ++i) {
      const double viol = std::max(0.0, qp.l[i] - ax[i]) + std::max(0.0, ax[i] - qp.u[i]);
      f += qp.soft_weight[i] * viol;
    }
  }
  return f;
}

QpSolution SolveQp(const DenseQp& qp, const QpSettings& s) {
  const int n = static_cast<int>(qp.q.size());
  const int m = static_cast<int>(qp.A.rows());
  if (qp.P.rows() != n || qp.P.cols() != n || qp.A.cols() != (m ? n : qp.A.cols()) ||
      qp.l.size() != m || qp.u.size() != m || qp.soft_weight.size() != m ||
      qp.x_lo.size() != n || qp.x_hi.size() != n) {
    throw Error("qp: inconsistent dimensions");
  }

  double rho = s.rho;
  Eigen::VectorXd x = Eigen::VectorXd::Zero(n).cwiseMax(qp.x_lo).cwiseMin(qp.x_hi);
  Eigen::VectorXd z_a = m ? Eigen::VectorXd(qp.A * x) : Eigen::VectorXd();
  Eigen::VectorXd z_b = x;
  Eigen::VectorXd y_a = Eigen::VectorXd::Zero(m), y_b = Eigen::VectorXd::Zero(n);

  const Eigen::MatrixXd ata = m ? Eigen::MatrixXd(qp.A.transpose() * qp.A)
                                : Eigen::MatrixXd::Zero(n, n);
  auto factor = [&](double r) {
    Eigen::MatrixXd k = qp.P + r * ata;
    k.diagonal().array() += s.sigma + r;
    return Eigen::LLT<Eigen::MatrixXd>(k);
  };
  Eigen::LLT<Eigen::MatrixXd> llt = factor(rho);

  QpSolution sol;
  Eigen::VectorXd rhs(n), x_t(n), z_ta(m), z_prev_a(m), z_prev_b(n), ax(m);
  for (int it = 1; it <= s.max_iter; ++it) {
    rhs = s.sigma * x - qp.q + rho * z_b - y_b;
    if (m) rhs.noalias() += qp.A.transpose() * (rho * z_a - y_a);
    x_t = llt.solve(rhs);
    if (m) z_ta.noalias() = qp.A * x_t;

    x = s.alpha * x_t + (1.0 - s.alpha) * x;
    z_prev_a = z_a;
    z_prev_b = z_b;
    for (int i = 0; i < m; ++i) {
      const double relaxed = s.alpha * z_ta[i] + (1.0 - s.alpha) * z_prev_a[i];
      z_a[i] = SoftProx(relaxed + y_a[i] / rho, qp.l[i], qp.u[i], qp.soft_weight[i], rho);
      y_a[i] += rho * (relaxed - z_a[i]);
    }
    for (int i = 0; i < n; ++i) {
      const double relaxed = s.alpha * x_t[i] + (1.0 - s.alpha) * z_prev_b[i];
      z_b[i] = std::clamp(relaxed + y_b[i] / rho, qp.x_lo[i], qp.x_hi[i]);
      y_b[i] += rho * (relaxed - z_b[i]);
    }

    const bool check = it % s.check_every == 0 || it == s.max_iter;
    const bool adapt = s.adapt_every > 0 && it % s.adapt_every == 0;
    if (!check && !adapt) continue;

    if (m) ax.noalias() = qp.A * x;
    const double prim = std::max(m ? InfNorm(ax - z_a) : 0.0, InfNorm(x - z_b));
    const Eigen::VectorXd px = qp.P * x;
    Eigen::VectorXd aty = y_b;
    if (m) aty.noalias() += qp.A.transpose() * y_a;
    const double dual = InfNorm(px + qp.q + aty);
    const double prim_scale = std::max({m ? InfNorm(ax) : 0.0, InfNorm(x),
                                        m ? InfNorm(z_a) : 0.0, InfNorm(z_b)});
    const double dual_scale = std::max({InfNorm(px), InfNorm(aty), InfNorm(qp.q)});
    sol.iterations = it;
    sol.primal_residual = prim;
    sol.dual_residual = dual;
    if (prim <= s.eps_abs + s.eps_rel * prim_scale &&
        dual <= s.eps_abs + s.eps_rel * dual_scale) {
      sol.converged = true;
      break;
    }
    if (adapt) {
      const double ratio = std::sqrt((prim / (prim_scale + 1e-12)) /
                                     (dual / (dual_scale + 1e-12) + 1e-12));
      const double new_rho = std::clamp(rho * ratio, 1e-6, 1e6);
      if (new_rho > 5.0 * rho || new_rho < 0.2 * rho) {
        rho = new_rho;
        llt = factor(rho);
      }
    }
  }
  // Return the bound-feasible iterate.
  sol.x = x.cwiseMax(qp.x_lo).cwiseMin(qp.x_hi);
  sol.y.resize(m + n);
  sol.y << y_a, y_b;
  return sol;
}

}  // namespace ccmpc
