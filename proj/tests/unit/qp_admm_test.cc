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

#include <limits>
#include <random>

#include <gtest/gtest.h>

#include "ccmpc/qp_admm.h"

namespace ccmpc {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

DenseQp Box2d() {
  // min (x - 3)^2 + (y + 1)^2 over a box, optionally with a row.
  DenseQp qp;
  qp.P = 2.0 * Eigen::MatrixXd::Identity(2, 2);
  qp.q = Eigen::Vector2d(-6.0, 2.0);
  qp.A.resize(0, 2);
  qp.l.resize(0);
  qp.u.resize(0);
  qp.soft_weight.resize(0);
  qp.x_lo = Eigen::Vector2d::Constant(-10);
  qp.x_hi = Eigen::Vector2d::Constant(10);
  return qp;
}

TEST(SolveQp, UnconstrainedMinimum) {
  const QpSolution s = SolveQp(Box2d());
  EXPECT_TRUE(s.converged);
  EXPECT_NEAR(s.x[0], 3.0, 1e-4);
  EXPECT_NEAR(s.x[1], -1.0, 1e-4);
}

TEST(SolveQp, ActiveBound) {
  DenseQp qp = Box2d();
  qp.x_hi[0] = 1.0;
  const QpSolution s = SolveQp(qp);
  EXPECT_NEAR(s.x[0], 1.0, 1e-4);
  EXPECT_NEAR(s.x[1], -1.0, 1e-4);
}

TEST(SolveQp, HardRowProjection) {
  DenseQp qp = Box2d();
  qp.A = Eigen::RowVector2d(1.0, 1.0);
  qp.l = Eigen::VectorXd::Constant(1, -kInf);
  qp.u = Eigen::VectorXd::Constant(1, 0.0);
  qp.soft_weight = Eigen::VectorXd::Zero(1);
  const QpSolution s = SolveQp(qp);
  // Projection of (3, -1) onto x + y <= 0 is (2, -2).
  EXPECT_NEAR(s.x[0], 2.0, 1e-3);
  EXPECT_NEAR(s.x[1], -2.0, 1e-3);
}

TEST(SolveQp, SoftRowIsExactWithLargeWeight) {
  DenseQp qp = Box2d();
  qp.A = Eigen::RowVector2d(1.0, 1.0);
  qp.l = Eigen::VectorXd::Constant(1, -kInf);
  qp.u = Eigen::VectorXd::Constant(1, 0.0);
  qp.soft_weight = Eigen::VectorXd::Constant(1, 100.0);
  const QpSolution s = SolveQp(qp);
  EXPECT_NEAR(s.x[0] + s.x[1], 0.0, 1e-3);
}

TEST(SolveQp, SoftRowWithSmallWeightIsPartial) {
  // Multiplier of the hard solution is 4; weight 1 lets the row slip.
  DenseQp qp = Box2d();
  qp.A = Eigen::RowVector2d(1.0, 1.0);
  qp.l = Eigen::VectorXd::Constant(1, -kInf);
  qp.u = Eigen::VectorXd::Constant(1, 0.0);
  qp.soft_weight = Eigen::VectorXd::Constant(1, 1.0);
  const QpSolution s = SolveQp(qp);
  // Stationarity: 2(x - 3) + 1 = 0, 2(y + 1) + 1 = 0.
  EXPECT_NEAR(s.x[0], 2.5, 1e-3);
  EXPECT_NEAR(s.x[1], -1.5, 1e-3);
}

TEST(SolveQp, MatchesProjectedGradientOnRandomProblems) {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> n01;
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 6;
    Eigen::MatrixXd m = Eigen::MatrixXd::NullaryExpr(n, n, [&] { return n01(rng); });
    DenseQp qp;
    qp.P = m * m.transpose() + Eigen::MatrixXd::Identity(n, n);
    qp.q = Eigen::VectorXd::NullaryExpr(n, [&] { return n01(rng); });
    qp.A.resize(0, n);
    qp.l.resize(0);
    qp.u.resize(0);
    qp.soft_weight.resize(0);
    qp.x_lo = Eigen::VectorXd::Constant(n, -0.3);
    qp.x_hi = Eigen::VectorXd::Constant(n, 0.3);
    QpSettings settings;
    settings.max_iter = 5000;
    settings.eps_abs = settings.eps_rel = 1e-8;
    const QpSolution s = SolveQp(qp, settings);
    // Oracle: projected gradient descent with a safe step.
    const double step = 1.0 / qp.P.operatorNorm();
    Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
    for (int it = 0; it < 20000; ++it) {
      x = (x - step * (qp.P * x + qp.q)).cwiseMax(qp.x_lo).cwiseMin(qp.x_hi);
    }
    EXPECT_LT((s.x - x).cwiseAbs().maxCoeff(), 1e-4) << trial;
    EXPECT_LE(QpObjective(qp, s.x), QpObjective(qp, x) + 1e-6);
  }
}

TEST(SolveQp, Deterministic) {
  DenseQp qp = Box2d();
  qp.A = Eigen::RowVector2d(1.0, -2.0);
  qp.l = Eigen::VectorXd::Constant(1, 0.5);
  qp.u = Eigen::VectorXd::Constant(1, 1.0);
  qp.soft_weight = Eigen::VectorXd::Constant(1, 10.0);
  const QpSolution a = SolveQp(qp), b = SolveQp(qp);
  EXPECT_EQ(a.x, b.x);
  EXPECT_EQ(a.iterations, b.iterations);
}

}  // namespace
}  // namespace ccmpc
