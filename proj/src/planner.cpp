#include <algorithm>
#include <chrono>
#include <cmath>
#include <string>

#include "camtraj/errors.hpp"
#include "camtraj/planner.hpp"

namespace camtraj {
namespace {

using Triplets = std::vector<Eigen::Triplet<double>>;

SparseMatrix from_triplets(int rows, int cols, const Triplets& t) {
  SparseMatrix m(rows, cols);
  m.setFromTriplets(t.begin(), t.end());
  m.makeCompressed();
  return m;
}

// Direct q-th difference of one state component at stage i.
double difference(const Eigen::MatrixXd& states, int component, int i, int q) {
  double binom = 1.0;
  double sum = 0.0;
  for (int k = 0; k <= q; ++k) {
    sum += (k % 2 == 0 ? 1.0 : -1.0) * binom * states(i - k, component);
    binom = binom * (q - k) / (k + 1);
  }
  return sum;
}

}  // namespace

void validate_keyframes(const KeyframeList& keyframes,
                        const GimbalParams& gimbal) {
  if (keyframes.empty()) throw ParameterError("at least one keyframe required");
  if (keyframes.front().time != 0.0) {
    throw ParameterError("first keyframe time must be 0");
  }
  for (std::size_t j = 0; j < keyframes.size(); ++j) {
    const Keyframe& kf = keyframes[j];
    if (!kf.position.allFinite() || !std::isfinite(kf.yaw) ||
        !std::isfinite(kf.pitch) || !std::isfinite(kf.time)) {
      throw ParameterError("keyframe " + std::to_string(j) +
                           " has non-finite fields");
    }
    if (j > 0 && !(kf.time > keyframes[j - 1].time)) {
      throw ParameterError("keyframe times must be strictly increasing (index " +
                           std::to_string(j) + ")");
    }
    if (kf.pitch < gimbal.pitch_min || kf.pitch > gimbal.pitch_max) {
      throw ParameterError("keyframe " + std::to_string(j) +
                           " pitch outside the gimbal pitch range");
    }
  }
}

TrajectoryQp assemble_qp(const KeyframeList& keyframes,
                         const DiscreteModel& model, const Grid& grid,
                         const Weights& weights, const QuadrotorParams& quad,
                         const GimbalParams& gimbal,
                         const State& initial_state) {
  if (grid.n_stages < 1) throw ParameterError("grid needs at least one stage");
  if (std::abs(grid.dt - model.dt) > 1e-12) {
    throw ParameterError("grid dt does not match the discrete model");
  }
  const double psi_g0 = initial_state[state::kGimbalYaw];
  const double phi_g0 = initial_state[state::kGimbalPitch];
  if (psi_g0 < gimbal.yaw_min || psi_g0 > gimbal.yaw_max) {
    throw InfeasibleError("initial gimbal yaw outside the gimbal yaw range");
  }
  if (phi_g0 < gimbal.pitch_min || phi_g0 > gimbal.pitch_max) {
    throw InfeasibleError("initial gimbal pitch outside the gimbal pitch range");
  }

  const int n = grid.n_stages;
  TrajectoryQp out;
  out.layout = VariableLayout(n);
  const VariableLayout& L = out.layout;
  const int nv = L.size();

  QuadraticCost cost = build_keyframe_cost(keyframes, grid, weights.keyframe);
  cost.add(build_derivative_cost(grid, weights.position_derivative,
                                 weights.angle_derivative));
  cost.add(build_orientation_cost(keyframes, grid, weights.orientation));
  out.tracking = cost;
  out.regularization = build_regularization_cost(grid, quad, weights);
  cost.add(out.regularization);

  QpProblem& qp = out.qp;
  qp.H = cost.hessian();
  qp.f = cost.linear();
  qp.constant = cost.constant();

  // Equalities: x_0 pinned, then x_{i+1} - A x_i - B u_i = c.
  const int me = kStateDim * (n + 1);
  Triplets eq;
  eq.reserve(static_cast<std::size_t>(kStateDim) * n * 8 + kStateDim);
  qp.b_eq.resize(me);
  for (int k = 0; k < kStateDim; ++k) {
    eq.emplace_back(k, L.state(0, k), 1.0);
    qp.b_eq[k] = initial_state[k];
  }
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < kStateDim; ++k) {
      const int row = kStateDim * (i + 1) + k;
      eq.emplace_back(row, L.state(i + 1, k), 1.0);
      for (int l = 0; l < kStateDim; ++l) {
        if (model.A(k, l) != 0.0) eq.emplace_back(row, L.state(i, l), -model.A(k, l));
      }
      for (int m = 0; m < kInputDim; ++m) {
        if (model.B(k, m) != 0.0) eq.emplace_back(row, L.input(i, m), -model.B(k, m));
      }
      qp.b_eq[row] = model.c[k];
    }
  }
  qp.A_eq = from_triplets(me, nv, eq);

  // Inequalities: input boxes at every input stage, gimbal angle boxes at
  // stages 1..N (stage 0 is pinned and checked above).
  Eigen::Matrix<double, kInputDim, 1> lo, hi;
  lo << quad.u_min, gimbal.rate_min;
  hi << quad.u_max, gimbal.rate_max;
  const int mi = 2 * kInputDim * n + 4 * n;
  Triplets in;
  in.reserve(mi);
  qp.b_ineq.resize(mi);
  int row = 0;
  auto box = [&](int var, double low, double high) {
    in.emplace_back(row, var, 1.0);
    qp.b_ineq[row++] = high;
    in.emplace_back(row, var, -1.0);
    qp.b_ineq[row++] = -low;
  };
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < kInputDim; ++k) box(L.input(i, k), lo[k], hi[k]);
  }
  for (int i = 1; i <= n; ++i) {
    box(L.state(i, state::kGimbalYaw), gimbal.yaw_min, gimbal.yaw_max);
    box(L.state(i, state::kGimbalPitch), gimbal.pitch_min, gimbal.pitch_max);
  }
  qp.A_ineq = from_triplets(mi, nv, in);
  return out;
}

Trajectory extract_trajectory(const Eigen::VectorXd& solution,
                              const VariableLayout& layout, const Grid& grid) {
  if (solution.size() != layout.size()) {
    throw ShapeError("solution vector does not match the variable layout");
  }
  Trajectory t;
  t.grid = grid;
  const int n = layout.n_stages();
  t.states = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                            Eigen::RowMajor>>(
      solution.data(), n + 1, kStateDim);
  t.inputs = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                            Eigen::RowMajor>>(
      solution.data() + layout.num_states(), n, kInputDim);
  return t;
}

Eigen::VectorXd flatten_trajectory(const Trajectory& traj) {
  const VariableLayout layout(traj.n_stages());
  Eigen::VectorXd x(layout.size());
  for (int i = 0; i <= traj.n_stages(); ++i) {
    for (int k = 0; k < kStateDim; ++k) x[layout.state(i, k)] = traj.states(i, k);
  }
  for (int i = 0; i < traj.n_stages(); ++i) {
    for (int k = 0; k < kInputDim; ++k) x[layout.input(i, k)] = traj.inputs(i, k);
  }
  return x;
}

double dynamics_residual(const Trajectory& traj, const DiscreteModel& model) {
  double worst = 0.0;
  for (int i = 0; i < traj.n_stages(); ++i) {
    const State predicted = model.step(traj.states.row(i).transpose(),
                                       traj.inputs.row(i).transpose());
    worst = std::max(worst, (traj.states.row(i + 1).transpose() - predicted)
                                .lpNorm<Eigen::Infinity>());
  }
  return worst;
}

CostBreakdown evaluate_costs(const Trajectory& traj,
                             const KeyframeList& keyframes,
                             const Weights& weights,
                             const QuadrotorParams& quad) {
  CostBreakdown c;
  const auto stages = keyframe_stages(keyframes, traj.grid.dt);
  for (std::size_t j = 0; j < keyframes.size(); ++j) {
    const int i = stages[j];
    c.keyframe += weights.keyframe *
                  (traj.position(i) - keyframes[j].position).squaredNorm();
    const double dyaw = traj.camera_yaw(i) - keyframes[j].yaw;
    const double dpitch = traj.camera_pitch(i) - keyframes[j].pitch;
    c.orientation += weights.orientation * (dyaw * dyaw + dpitch * dpitch);
  }
  const int n = traj.n_stages();
  for (int q = 1; q <= 3; ++q) {
    const double scale = std::pow(traj.grid.dt, -q);
    for (int i = q; i <= n; ++i) {
      for (int comp : {state::kX, state::kY, state::kZ}) {
        const double d = difference(traj.states, comp, i, q) * scale;
        c.derivative += weights.position_derivative[q - 1] * d * d;
      }
      for (int comp : {state::kBodyYaw, state::kGimbalYaw, state::kGimbalPitch}) {
        const double d = difference(traj.states, comp, i, q) * scale;
        c.derivative += weights.angle_derivative[q - 1] * d * d;
      }
    }
  }
  const Input hover = hover_input(quad);
  for (int i = 0; i <= n; ++i) {
    const double g = traj.states(i, state::kGimbalYaw);
    c.regularization += weights.gimbal_centering * g * g;
  }
  for (int i = 0; i < n; ++i) {
    c.regularization += weights.input_regularization *
                        (traj.inputs.row(i).transpose() - hover).squaredNorm();
  }
  return c;
}

State default_initial_state(const KeyframeList& keyframes,
                            const GimbalParams& gimbal) {
  State x = State::Zero();
  const Keyframe& first = keyframes.front();
  x.head<3>() = first.position;
  x[state::kBodyYaw] = first.yaw;
  x[state::kGimbalYaw] = std::clamp(0.0, gimbal.yaw_min, gimbal.yaw_max);
  x[state::kGimbalPitch] =
      std::clamp(first.pitch, gimbal.pitch_min, gimbal.pitch_max);
  return x;
}

PlanResult plan_trajectory(const KeyframeList& keyframes,
                           const QuadrotorParams& quad,
                           const GimbalParams& gimbal, const Weights& weights,
                           double dt, const PlanOptions& options) {
  quad.validate();
  gimbal.validate();
  weights.validate();
  validate_keyframes(keyframes, gimbal);

  PlanResult result;
  result.keyframes = unwrap_yaws(keyframes);
  result.stages = keyframe_stages(result.keyframes, dt);

  const Grid grid{dt, horizon_stages(result.keyframes, dt, weights)};
  const DiscreteModel model = build_discrete_model(quad, gimbal, dt);
  const State x0 = options.initial_state.value_or(
      default_initial_state(result.keyframes, gimbal));

  const TrajectoryQp problem =
      assemble_qp(result.keyframes, model, grid, weights, quad, gimbal, x0);
  QpSolution sol = solve_qp(problem.qp, options.solver);
  if (sol.report.status != SolveStatus::kOptimal) {
    throw SolverError(std::string("QP solve ended with status ") +
                      to_string(sol.report.status) + ": " +
                      sol.report.diagnostic);
  }

  result.trajectory = extract_trajectory(sol.x, problem.layout, grid);
  result.costs.regularization = problem.regularization.evaluate(sol.x);
  result.report = sol.report;
  result.report.objective = problem.tracking.evaluate(sol.x);

  const CostBreakdown direct =
      evaluate_costs(result.trajectory, result.keyframes, weights, quad);
  result.costs.keyframe = direct.keyframe;
  result.costs.derivative = direct.derivative;
  result.costs.orientation = direct.orientation;
  return result;
}

}  // namespace camtraj
