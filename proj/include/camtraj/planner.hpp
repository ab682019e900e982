#pragma once

#include <Eigen/Dense>
#include <array>
#include <optional>
#include <vector>

#include "camtraj/dynamics.hpp"
#include "camtraj/qp_solver.hpp"

namespace camtraj {

/// A timed camera pose the trajectory should pass through.
struct Keyframe {
  Eigen::Vector3d position = Eigen::Vector3d::Zero();  // m
  double yaw = 0.0;    // rad, camera yaw (body + gimbal)
  double pitch = 0.0;  // rad, gimbal pitch
  double time = 0.0;   // s

  bool operator==(const Keyframe&) const = default;
};

using KeyframeList = std::vector<Keyframe>;

struct Weights {
  double keyframe = 1e4;
  double orientation = 1e4;
  // Index q-1 weighs the q-th finite difference.
  std::array<double, 3> position_derivative{0.0, 1e-3, 1.0};
  std::array<double, 3> angle_derivative{0.0, 1e-3, 1.0};
  // Pulls gimbal yaw toward its center; fixes the otherwise free split of a
  // yaw sweep between body and gimbal.
  double gimbal_centering = 1e-3;
  // Deviation of inputs from hover; fixes free directions in unconstrained
  // stretches of the horizon.
  double input_regularization = 1e-6;

  /// Highest derivative order with nonzero weight (0 if none).
  int max_order() const;
  void validate() const;

  bool operator==(const Weights&) const = default;
};

/// Decision vector layout: [x_0 .. x_N, u_0 .. u_{N-1}].
class VariableLayout {
 public:
  explicit VariableLayout(int n_stages) : n_stages_(n_stages) {}

  int n_stages() const { return n_stages_; }
  int num_states() const { return (n_stages_ + 1) * kStateDim; }
  int num_inputs() const { return n_stages_ * kInputDim; }
  int size() const { return num_states() + num_inputs(); }
  int state(int stage, int component) const {
    return stage * kStateDim + component;
  }
  int input(int stage, int component) const {
    return num_states() + stage * kInputDim + component;
  }

 private:
  int n_stages_;
};

/// Accumulates weight * (c'x - target)^2 terms as 1/2 x'Hx + f'x + constant.
class QuadraticCost {
 public:
  explicit QuadraticCost(int num_variables);

  struct Term {
    int index;
    double coeff;
  };

  void add_square(std::initializer_list<Term> terms, double target,
                  double weight);
  void add_square(const std::vector<Term>& terms, double target, double weight);
  void add(const QuadraticCost& other);

  int num_variables() const { return static_cast<int>(linear_.size()); }
  SparseMatrix hessian() const;
  const Eigen::VectorXd& linear() const { return linear_; }
  double constant() const { return constant_; }
  /// Sum of the weighted squared residuals; avoids the cancellation of the
  /// expanded form when H has large entries.
  double evaluate(const Eigen::VectorXd& x) const;
  double evaluate_quadratic_form(const Eigen::VectorXd& x) const;

 private:
  struct Residual {
    std::size_t end;  // one past the last entry in residual_terms_
    double target;
    double weight;
  };
  std::vector<Term> residual_terms_;
  std::vector<Residual> residuals_;
  std::vector<Eigen::Triplet<double>> triplets_;
  Eigen::VectorXd linear_;
  double constant_ = 0.0;
};

/// lambda_k * sum_j |r_eta(j) - k_j|^2.
QuadraticCost build_keyframe_cost(const KeyframeList& keyframes,
                                  const Grid& grid, double weight);

/// Finite-difference penalties of order 1..3 on positions and on the three
/// angles (body yaw, gimbal yaw, gimbal pitch), summed from stage q to N.
QuadraticCost build_derivative_cost(const Grid& grid,
                                    const std::array<double, 3>& position_weights,
                                    const std::array<double, 3>& angle_weights);

/// lambda_o * sum_j [(psi_g + psi_q - psi_j)^2 + (phi_g - phi_j)^2].
QuadraticCost build_orientation_cost(const KeyframeList& keyframes,
                                     const Grid& grid, double weight);

/// Gimbal centering plus input-deviation-from-hover terms.
QuadraticCost build_regularization_cost(const Grid& grid,
                                        const QuadrotorParams& quad,
                                        const Weights& weights);

/// Shifts each desired yaw by multiples of 2*pi to lie within pi of the
/// previous one.
KeyframeList unwrap_yaws(KeyframeList keyframes);

/// Grid stage of every keyframe.
std::vector<int> keyframe_stages(const KeyframeList& keyframes, double dt);

/// Number of stages spanned by the keyframes, at least the highest penalized
/// derivative order.
int horizon_stages(const KeyframeList& keyframes, double dt,
                   const Weights& weights);

struct TrajectoryQp {
  QpProblem qp;
  VariableLayout layout{1};
  QuadraticCost tracking{0};  // keyframe + derivative + orientation
  QuadraticCost regularization{0};
};

TrajectoryQp assemble_qp(const KeyframeList& keyframes,
                         const DiscreteModel& model, const Grid& grid,
                         const Weights& weights, const QuadrotorParams& quad,
                         const GimbalParams& gimbal, const State& initial_state);

struct Trajectory {
  Grid grid;
  Eigen::MatrixXd states;  // (N+1) x 10
  Eigen::MatrixXd inputs;  // N x 6

  int n_stages() const { return grid.n_stages; }
  Eigen::Vector3d position(int stage) const {
    return states.row(stage).head<3>().transpose();
  }
  double camera_yaw(int stage) const {
    return states(stage, state::kBodyYaw) + states(stage, state::kGimbalYaw);
  }
  double camera_pitch(int stage) const {
    return states(stage, state::kGimbalPitch);
  }
};

Trajectory extract_trajectory(const Eigen::VectorXd& solution,
                              const VariableLayout& layout, const Grid& grid);

Eigen::VectorXd flatten_trajectory(const Trajectory& traj);

/// max |x_{i+1} - (A x_i + B u_i + c)| over the trajectory.
double dynamics_residual(const Trajectory& traj, const DiscreteModel& model);

struct CostBreakdown {
  double keyframe = 0.0;
  double derivative = 0.0;
  double orientation = 0.0;
  double regularization = 0.0;
};

/// Weighted costs evaluated directly from the trajectory (no QP matrices).
CostBreakdown evaluate_costs(const Trajectory& traj,
                             const KeyframeList& keyframes,
                             const Weights& weights,
                             const QuadrotorParams& quad);

/// Default start: first keyframe position, at rest, body yaw on the first
/// desired yaw, gimbal yaw centered, gimbal pitch on the first desired pitch.
State default_initial_state(const KeyframeList& keyframes,
                            const GimbalParams& gimbal);

struct PlanResult {
  Trajectory trajectory;
  // objective = lambda-weighted keyframe + derivative + orientation costs.
  SolveReport report;
  CostBreakdown costs;
  KeyframeList keyframes;  // with unwrapped yaws
  std::vector<int> stages;
};

struct PlanOptions {
  std::optional<State> initial_state;
  QpSettings solver;
};

/// Keyframes -> grid -> model -> QP -> single direct solve -> trajectory.
/// Throws SolverError when the QP is not solved to optimality.
PlanResult plan_trajectory(const KeyframeList& keyframes,
                           const QuadrotorParams& quad,
                           const GimbalParams& gimbal, const Weights& weights,
                           double dt, const PlanOptions& options = {});

void validate_keyframes(const KeyframeList& keyframes,
                        const GimbalParams& gimbal);

}  // namespace camtraj
