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

#include "ccmpc/planner.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>

#include "ccmpc/qp_admm.h"
#include "ccmpc/special_functions.h"

namespace ccmpc {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
// Field-of-view, speed and altitude rows further than this from their bound are left
// out of the QP; the merit function still sees them.
constexpr double kFovRowMargin = 1.0;
constexpr double kSpeedRowMargin = 0.5;
constexpr double kAltitudeRowMargin = 0.5;
constexpr double kViolationTolerance = 1e-3;

Mat3 SymmetricSqrt(const Mat3& m) {
  Eigen::SelfAdjointEigenSolver<Mat3> es(Symmetrized(m));
  return es.eigenvectors() *
         es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal() *
         es.eigenvectors().transpose();
}

struct Evaluation {
  std::vector<MavState> states;
  double cost = 0.0;
  double violation_sum = 0.0;
  double merit = 0.0;
};

Eigen::VectorXd Flatten(std::span<const ControlInput> controls) {
  Eigen::VectorXd u(kControlDim * controls.size());
  for (size_t k = 0; k < controls.size(); ++k) {
    u.segment<kControlDim>(kControlDim * k) = controls[k].ToVector();
  }
  return u;
}

std::vector<ControlInput> Unflatten(const Eigen::VectorXd& u) {
  std::vector<ControlInput> c(u.size() / kControlDim);
  for (size_t k = 0; k < c.size(); ++k) {
    c[k] = ControlInput::FromVector(u.segment<kControlDim>(kControlDim * k));
  }
  return c;
}

// Violations of every softened inequality at one stage, summed (L1) and
// maxed.
struct StageViolation {
  double sum = 0.0;
  double max = 0.0;
  double min_chance = kInf;
};

StageViolation StageViolations(const PlanningProblem& pr, int k, const MavState& x) {
  const PlannerParams& prm = pr.params;
  StageViolation out;
  auto add = [&](double residual) {
    const double v = std::max(0.0, -residual);
    out.sum += v;
    out.max = std::max(out.max, v);
  };
  for (const auto& ob : pr.obstacles) {
    const auto& step = ob.steps[k];
    double c;
    try {
      c = ChanceConstraintResidual(x.p, pr.position_covariances[k], step.ellipsoid,
                                   step.position_cov, prm.delta, prm.mav_radius)
              .value;
    } catch (const Error&) {
      c = -1.0;  // coincident centers: deepest possible violation of the margin
    }
    out.min_chance = std::min(out.min_chance, c);
    add(c);
  }
  if (pr.fov) {
    for (double r : pr.fov->Residuals(x.p)) add(r);
  }
  for (int i = 0; i < 3; ++i) add(prm.max_speed - std::fabs(x.v[i]));
  if (std::isfinite(prm.min_altitude)) add(x.p.z() - prm.min_altitude);
  if (std::isfinite(prm.max_altitude)) add(prm.max_altitude - x.p.z());
  add(prm.dynamics.attitude_limit - std::fabs(x.roll));
  add(prm.dynamics.attitude_limit - std::fabs(x.pitch));
  return out;
}

Evaluation Evaluate(const PlanningProblem& pr, const Eigen::VectorXd& u) {
  Evaluation e;
  const auto controls = Unflatten(u);
  e.states = Rollout(pr.x0, controls, pr.params.dt, pr.params.dynamics);
  e.cost = EvaluateCost(pr, e.states, controls);
  for (int k = 0; k < static_cast<int>(e.states.size()); ++k) {
    e.violation_sum += StageViolations(pr, k, e.states[k]).sum;
  }
  e.merit = e.cost + pr.params.penalty_weight * e.violation_sum;
  return e;
}

}  // namespace

void PlannerParams::Validate() const {
  if (horizon < 1) throw Error("planner: horizon must be >= 1");
  if (!(dt > 0.0)) throw Error("planner: dt must be > 0");
  if (!(delta > 0.0 && delta < 0.5)) throw Error("planner: delta must lie in (0, 0.5)");
  if (!(mav_radius > 0.0)) throw Error("planner: mav radius must be > 0");
  if (!IsPsd(goal_weight) || (control_weight.array() < 0.0).any() ||
      collision_weight < 0.0 || yaw_weight < 0.0) {
    throw Error("planner: weights must be positive semidefinite");
  }
  if ((u_min.array() > u_max.array()).any()) throw Error("planner: u_min > u_max");
  if (max_obstacles < 0) throw Error("planner: max_obstacles must be >= 0");
  if (sqp_iterations < 1) throw Error("planner: sqp_iterations must be >= 1");
  if (!(min_altitude < max_altitude)) throw Error("planner: min_altitude must be < max_altitude");
  if (yaw_speed_gate < 0.0 || fov_backoff < 0.0 || yaw_goal_distance < 0.0) {
    throw Error("planner: yaw_speed_gate, yaw_goal_distance and fov_backoff must be >= 0");
  }
}

std::array<double, 5> FovRegion::Residuals(const Vec3& p) const {
  std::array<double, 5> r;
  for (int j = 0; j < 5; ++j) r[j] = offsets[j] - normals[j].dot(p);
  return r;
}

bool FovRegion::Contains(const Vec3& p) const {
  const auto r = Residuals(p);
  return std::all_of(r.begin(), r.end(), [](double v) { return v >= 0.0; });
}

FovRegion FovHalfspaces(const Pose& pose, const CameraIntrinsics& intrinsics) {
  const Mat3 r = RotationOf(pose);
  const double sh = std::sin(0.5 * intrinsics.h_fov), ch = std::cos(0.5 * intrinsics.h_fov);
  const double sv = std::sin(0.5 * intrinsics.v_fov), cv = std::cos(0.5 * intrinsics.v_fov);
  const std::array<Vec3, 5> body = {Vec3(-sh, ch, 0.0), Vec3(-sh, -ch, 0.0),
                                    Vec3(-sv, 0.0, cv), Vec3(-sv, 0.0, -cv),
                                    Vec3(1.0, 0.0, 0.0)};
  FovRegion fov;
  for (int j = 0; j < 5; ++j) {
    fov.normals[j] = r * body[j];
    fov.offsets[j] = fov.normals[j].dot(pose.position);
  }
  fov.offsets[4] += intrinsics.max_range;
  return fov;
}

std::string ToString(SolveStatus status) {
  switch (status) {
    case SolveStatus::kOptimal: return "optimal";
    case SolveStatus::kMaxIter: return "max_iter";
    case SolveStatus::kInfeasibleSoftened: return "infeasible_softened";
  }
  return "unknown";
}

double GoalCost(const Vec3& p_terminal, const Vec3& goal, const Mat3& q_g) {
  const Vec3 e = p_terminal - goal;
  return e.dot(q_g * e);
}

double CollisionCost(double distance, double q_o, double lambda, double r_o) {
  return q_o / (1.0 + std::exp(lambda * (distance - r_o)));
}

double YawReference(const Vec3& v_prev, double previous, double speed_gate) {
  if (std::hypot(v_prev.x(), v_prev.y()) < speed_gate) return previous;
  return std::atan2(v_prev.y(), v_prev.x());
}

Mat3 OmegaSqrt(const Ellipsoid& obstacle, double mav_radius) {
  const Mat3 r = RotationZ(obstacle.yaw);
  const Vec3 inv = (obstacle.semi_axes.array() + mav_radius).inverse();
  return r * inv.asDiagonal() * r.transpose();
}

ChanceResidual ChanceConstraintResidual(const Vec3& p_mean, const Mat3& p_cov,
                                        const Ellipsoid& obstacle,
                                        const Mat3& obstacle_cov, double delta,
                                        double mav_radius) {
  const Vec3 d = p_mean - obstacle.center;
  const double norm = d.norm();
  if (norm < 1e-12) throw Error("chance constraint: coincident centers");
  const Mat3 a = OmegaSqrt(obstacle, mav_radius);
  const Mat3 m = a * (p_cov + obstacle_cov) * a;
  const double kappa = ErfInv(1.0 - 2.0 * delta);

  const Vec3 ad = a * d;
  const Vec3 md = m * d;
  const double dad = d.dot(ad);
  const double dmd = std::max(0.0, d.dot(md));
  const double n2 = norm * norm;
  const double q = dmd / n2;  // n' M n

  ChanceResidual out;
  out.value = dad / norm - 1.0 - kappa * std::sqrt(2.0 * q);
  const Vec3 grad_margin = 2.0 * ad / norm - dad * d / (n2 * norm);
  Vec3 grad_spread = Vec3::Zero();
  if (q > 1e-300) {
    const Vec3 grad_q = 2.0 * md / n2 - 2.0 * dmd * d / (n2 * n2);
    grad_spread = kappa * std::sqrt(2.0) * grad_q / (2.0 * std::sqrt(q));
  }
  out.gradient = grad_margin - grad_spread;
  return out;
}

int PlanningProblem::NumChanceRows() const {
  return static_cast<int>(obstacles.size()) * params.horizon;
}

int PlanningProblem::NumFovRows() const { return fov ? 5 * params.horizon : 0; }

std::vector<ObstaclePrediction> SelectClosest(std::vector<ObstaclePrediction> all,
                                              std::span<const Vec3> current_centers,
                                              const Vec3& position, int max_obstacles) {
  if (current_centers.size() != all.size()) {
    throw Error("select closest: one current center per prediction required");
  }
  std::vector<int> order(all.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return (current_centers[a] - position).squaredNorm() <
           (current_centers[b] - position).squaredNorm();
  });
  std::vector<ObstaclePrediction> out;
  for (int i = 0; i < static_cast<int>(order.size()) && i < max_obstacles; ++i) {
    out.push_back(std::move(all[order[i]]));
  }
  return out;
}

std::vector<ControlInput> ShiftControls(const PlanResult& prev, int horizon) {
  std::vector<ControlInput> out;
  out.reserve(horizon);
  for (int k = 1; k < static_cast<int>(prev.controls.size()) && k <= horizon; ++k) {
    out.push_back(prev.controls[k]);
  }
  const ControlInput last = prev.controls.empty() ? ControlInput{} : prev.controls.back();
  while (static_cast<int>(out.size()) < horizon) out.push_back(last);
  return out;
}

std::vector<MavState> Rollout(const MavState& x0, std::span<const ControlInput> controls,
                              double dt, const DynamicsParams& params) {
  std::vector<MavState> states;
  states.reserve(controls.size());
  MavState x = x0;
  for (const auto& u : controls) {
    x = DynamicsStep(x, u, dt, params);
    states.push_back(x);
  }
  return states;
}

PlanningProblem BuildProblem(const GaussianState& x0, const Vec3& goal,
                             std::vector<ObstaclePrediction> obstacles,
                             std::optional<FovRegion> fov,
                             const PlanResult* prev_plan,
                             const PlannerParams& params) {
  params.Validate();
  if (x0.dim() != kStateDim || x0.covariance.rows() != kStateDim) {
    throw Error("build problem: expected a 9-state estimate");
  }
  const int n = params.horizon;
  PlanningProblem pr;
  pr.params = params;
  pr.x0 = MavState::FromVector(x0.mean);
  pr.gamma0 = Symmetrized(StateMat(x0.covariance));
  pr.goal = goal;
  if (static_cast<int>(obstacles.size()) > params.max_obstacles) {
    obstacles.resize(params.max_obstacles);
  }
  for (const auto& ob : obstacles) {
    if (static_cast<int>(ob.steps.size()) < n) {
      throw Error("build problem: obstacle prediction shorter than the horizon");
    }
    const Vec3& axes = ob.steps.front().ellipsoid.semi_axes;
    const double extent = params.horizontal_collision_radius ? axes.head<2>().maxCoeff()
                                                             : axes.maxCoeff();
    pr.collision_radius.push_back(extent + params.mav_radius + params.collision_margin);
  }
  pr.obstacles = std::move(obstacles);
  if (params.use_fov && fov) {
    pr.fov = fov;
    const Vec3 axis = fov->normals[4];
    for (int j = 0; j < 4; ++j) pr.fov->offsets[j] -= params.fov_backoff * fov->normals[j].dot(axis);
  }

  pr.initial_controls = prev_plan ? ShiftControls(*prev_plan, n)
                                  : std::vector<ControlInput>(n);
  for (auto& c : pr.initial_controls) {
    c = ControlInput::FromVector(c.ToVector().cwiseMax(params.u_min).cwiseMin(params.u_max));
  }
  const auto nominal = Rollout(pr.x0, pr.initial_controls, params.dt, params.dynamics);
  std::vector<std::pair<MavState, ControlInput>> traj;
  traj.reserve(n);
  for (int k = 0; k < n; ++k) {
    traj.emplace_back(k == 0 ? pr.x0 : nominal[k - 1], pr.initial_controls[k]);
  }
  for (const auto& g : PropagateCovariance(pr.gamma0, traj, params.process_noise,
                                           params.dt, params.dynamics)) {
    pr.position_covariances.push_back(g.topLeftCorner<3, 3>());
  }
  double ref = pr.x0.yaw;
  for (int k = 0; k < n; ++k) {
    // Slow segments face the goal unless it is already close.
    const Vec3 to_goal = goal - nominal[k].p;
    const double hold = to_goal.head<2>().norm() > params.yaw_goal_distance
                            ? std::atan2(to_goal.y(), to_goal.x())
                            : ref;
    ref = YawReference(nominal[k].v, hold, params.yaw_speed_gate);
    pr.yaw_reference.push_back(ref);
  }
  return pr;
}

double EvaluateCost(const PlanningProblem& pr, std::span<const MavState> states,
                    std::span<const ControlInput> controls) {
  const PlannerParams& prm = pr.params;
  double cost = 0.0;
  for (const auto& u : controls) {
    const ControlVec uv = u.ToVector();
    cost += uv.dot(prm.control_weight.cwiseProduct(uv));
  }
  for (int k = 0; k < static_cast<int>(states.size()); ++k) {
    const MavState& x = states[k];
    for (size_t o = 0; o < pr.obstacles.size(); ++o) {
      const double d = (x.p - pr.obstacles[o].steps[k].position).norm();
      cost += CollisionCost(d, prm.collision_weight, prm.collision_steepness,
                            pr.collision_radius[o]);
    }
    const double e = WrapAngle(x.yaw - pr.yaw_reference[k]);
    cost += prm.yaw_weight * e * e;
  }
  if (!states.empty()) cost += GoalCost(states.back().p, pr.goal, prm.goal_weight);
  return cost;
}

double MaxConstraintViolation(const PlanningProblem& problem,
                              std::span<const MavState> states) {
  double worst = 0.0;
  for (int k = 0; k < static_cast<int>(states.size()); ++k) {
    worst = std::max(worst, StageViolations(problem, k, states[k]).max);
  }
  return worst;
}

PlanResult Solve(const PlanningProblem& pr) {
  const auto start = std::chrono::steady_clock::now();
  const PlannerParams& prm = pr.params;
  const int n = prm.horizon;
  const int nu = kControlDim * n;
  const int n_obs = static_cast<int>(pr.obstacles.size());
  if (static_cast<int>(pr.initial_controls.size()) != n ||
      static_cast<int>(pr.position_covariances.size()) != n ||
      static_cast<int>(pr.yaw_reference.size()) != n) {
    throw Error("solve: problem is not built for the configured horizon");
  }

  Eigen::VectorXd u_lo(nu), u_hi(nu), half_range(nu);
  for (int k = 0; k < n; ++k) {
    u_lo.segment<kControlDim>(kControlDim * k) = prm.u_min;
    u_hi.segment<kControlDim>(kControlDim * k) = prm.u_max;
  }
  half_range = 0.5 * (u_hi - u_lo);

  Eigen::VectorXd u = Flatten(pr.initial_controls).cwiseMax(u_lo).cwiseMin(u_hi);
  Evaluation current = Evaluate(pr, u);

  const Mat3 goal_sqrt = SymmetricSqrt(prm.goal_weight);
  const double yaw_sqrt = std::sqrt(prm.yaw_weight);
  Eigen::VectorXd h_control(nu);
  for (int k = 0; k < n; ++k) {
    h_control.segment<kControlDim>(kControlDim * k) = 2.0 * prm.control_weight;
  }

  std::vector<Eigen::Matrix<double, kStateDim, Eigen::Dynamic>> sens(
      n, Eigen::Matrix<double, kStateDim, Eigen::Dynamic>::Zero(kStateDim, nu));
  const int n_residuals = 3 + n + n * n_obs;
  Eigen::MatrixXd jr(n_residuals, nu);
  Eigen::VectorXd res(n_residuals);

  double trust = 1.0;
  bool converged = false;
  int iterations = 0;
  QpSettings qp_settings;
  for (int iter = 0; iter < prm.sqp_iterations; ++iter) {
    ++iterations;
    const auto controls = Unflatten(u);
    const auto& xs = current.states;

    // Forward sensitivities S_k = d x_k / d U.
    for (int k = 0; k < n; ++k) {
      const MavState& prev = k == 0 ? pr.x0 : xs[k - 1];
      const int cols = kControlDim * k;
      auto& s = sens[k];
      s.setZero();
      if (k > 0 && cols > 0) {
        s.leftCols(cols).noalias() =
            Jacobian(prev, controls[k], prm.dt, prm.dynamics) * sens[k - 1].leftCols(cols);
      }
      s.middleCols<kControlDim>(cols) =
          ControlJacobian(prev, controls[k], prm.dt, prm.dynamics);
    }

    // Gauss-Newton residuals.
    jr.setZero();
    res.setZero();
    int row = 0;
    res.segment<3>(row) = goal_sqrt * (xs[n - 1].p - pr.goal);
    jr.middleRows<3>(row) = goal_sqrt * sens[n - 1].topRows<3>();
    row += 3;
    for (int k = 0; k < n; ++k, ++row) {
      res[row] = yaw_sqrt * WrapAngle(xs[k].yaw - pr.yaw_reference[k]);
      jr.row(row) = yaw_sqrt * sens[k].row(8);
    }
    for (int o = 0; o < n_obs; ++o) {
      for (int k = 0; k < n; ++k, ++row) {
        const Vec3 diff = xs[k].p - pr.obstacles[o].steps[k].position;
        const double d = diff.norm();
        const double j = CollisionCost(d, prm.collision_weight, prm.collision_steepness,
                                       pr.collision_radius[o]);
        if (j < 1e-200 || d < 1e-9) continue;
        const double r = std::sqrt(j);
        const double dj_dd = -prm.collision_steepness * j * (1.0 - j / prm.collision_weight);
        res[row] = r;
        jr.row(row) = (dj_dd / (2.0 * r)) * (diff / d).transpose() * sens[k].topRows<3>();
      }
    }

    DenseQp qp;
    qp.P = 2.0 * jr.transpose() * jr;
    qp.P.diagonal() += h_control;
    qp.P.diagonal().array() += 1e-6;
    qp.q = 2.0 * jr.transpose() * res + h_control.cwiseProduct(u);

    // Linearized inequalities.
    std::vector<Eigen::RowVectorXd> rows;
    std::vector<double> lo, hi;
    for (int o = 0; o < n_obs; ++o) {
      for (int k = 0; k < n; ++k) {
        const auto& step = pr.obstacles[o].steps[k];
        ChanceResidual c;
        try {
          c = ChanceConstraintResidual(xs[k].p, pr.position_covariances[k], step.ellipsoid,
                                       step.position_cov, prm.delta, prm.mav_radius);
        } catch (const Error&) {
          c.value = -1.0;
          c.gradient = Vec3::UnitX();
        }
        rows.push_back(c.gradient.transpose() * sens[k].topRows<3>());
        lo.push_back(-c.value);
        hi.push_back(kInf);
      }
    }
    if (pr.fov) {
      for (int k = 0; k < n; ++k) {
        const auto r = pr.fov->Residuals(xs[k].p);
        for (int j = 0; j < 5; ++j) {
          if (r[j] > kFovRowMargin) continue;
          rows.push_back(-pr.fov->normals[j].transpose() * sens[k].topRows<3>());
          lo.push_back(-r[j]);
          hi.push_back(kInf);
        }
      }
    }
    for (int k = 0; k < n; ++k) {
      for (int i = 0; i < 3; ++i) {
        const double v = xs[k].v[i];
        if (std::fabs(v) < prm.max_speed - kSpeedRowMargin) continue;
        rows.push_back(sens[k].row(3 + i));
        lo.push_back(-prm.max_speed - v);
        hi.push_back(prm.max_speed - v);
      }
      const double z = xs[k].p.z();
      if (z - prm.min_altitude < kAltitudeRowMargin ||
          prm.max_altitude - z < kAltitudeRowMargin) {
        rows.push_back(sens[k].row(2));
        lo.push_back(prm.min_altitude - z);
        hi.push_back(prm.max_altitude - z);
      }
    }
    const int m = static_cast<int>(rows.size());
    qp.A.resize(m, nu);
    qp.l.resize(m);
    qp.u.resize(m);
    for (int i = 0; i < m; ++i) {
      qp.A.row(i) = rows[i];
      qp.l[i] = lo[i];
      qp.u[i] = hi[i];
    }
    qp.soft_weight = Eigen::VectorXd::Constant(m, prm.penalty_weight);
    qp.x_lo = (u_lo - u).cwiseMax(-trust * half_range);
    qp.x_hi = (u_hi - u).cwiseMin(trust * half_range);

    const QpSolution sol = SolveQp(qp, qp_settings);
    const Eigen::VectorXd step = sol.x;
    if (step.cwiseAbs().maxCoeff() < 1e-6) {
      converged = true;
      break;
    }

    bool accepted = false;
    for (double alpha = 1.0; alpha >= 0.124; alpha *= 0.5) {
      const Eigen::VectorXd trial_u = (u + alpha * step).cwiseMax(u_lo).cwiseMin(u_hi);
      Evaluation trial = Evaluate(pr, trial_u);
      if (trial.merit < current.merit - 1e-9) {
        u = trial_u;
        current = std::move(trial);
        accepted = true;
        if (alpha == 1.0) trust = std::min(1.0, 2.0 * trust);
        if ((alpha * step).cwiseAbs().maxCoeff() < 1e-5) converged = true;
        break;
      }
    }
    if (!accepted) {
      trust *= 0.25;
      if (trust < 1e-4) {
        converged = true;
        break;
      }
    }
    if (converged) break;
  }

  PlanResult out;
  out.controls = Unflatten(u);
  out.states = current.states;
  out.covariances = pr.position_covariances;
  out.cost = current.cost;
  out.iterations = iterations;
  out.min_chance_residual.resize(n);
  for (int k = 0; k < n; ++k) {
    out.min_chance_residual[k] = StageViolations(pr, k, out.states[k]).min_chance;
  }
  out.max_constraint_violation = MaxConstraintViolation(pr, out.states);
  if (out.max_constraint_violation > kViolationTolerance) {
    out.status = SolveStatus::kInfeasibleSoftened;
  } else {
    out.status = converged ? SolveStatus::kOptimal : SolveStatus::kMaxIter;
  }
  out.solve_time =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

PlanResult Planner::Plan(const GaussianState& x0, const Vec3& goal,
                         std::vector<ObstaclePrediction> obstacles,
                         std::optional<FovRegion> fov) {
  const PlanningProblem problem =
      BuildProblem(x0, goal, std::move(obstacles), std::move(fov),
                   last_ ? &*last_ : nullptr, params_);
  PlanResult result = Solve(problem);
  last_ = result;
  return result;
}

}  // namespace ccmpc
