#pragma once

#include <Eigen/Dense>
#include <numbers>
#include <span>
#include <vector>

namespace camtraj {

inline constexpr int kStateDim = 10;
inline constexpr int kInputDim = 6;

using State = Eigen::Matrix<double, kStateDim, 1>;
using Input = Eigen::Matrix<double, kInputDim, 1>;

// State layout: [x, y, z, body yaw, gimbal yaw, gimbal pitch, vx, vy, vz, body yaw rate].
namespace state {
enum : int {
  kX = 0,
  kY = 1,
  kZ = 2,
  kBodyYaw = 3,
  kGimbalYaw = 4,
  kGimbalPitch = 5,
  kVx = 6,
  kVy = 7,
  kVz = 8,
  kBodyYawRate = 9,
};
}  // namespace state

// Input layout: [Fx, Fy, Fz, yaw torque, gimbal yaw rate, gimbal pitch rate].
namespace input {
enum : int {
  kFx = 0,
  kFy = 1,
  kFz = 2,
  kTorque = 3,
  kGimbalYawRate = 4,
  kGimbalPitchRate = 5,
};
}  // namespace input

/// Rigid-body quadrotor with fixed roll/pitch: translational double
/// integrator driven by force plus gravity, and a yaw double integrator
/// driven by torque. Bounds are on [Fx, Fy, Fz, M_yaw].
struct QuadrotorParams {
  double mass = 0.5;        // kg
  double inertia_z = 0.01;  // kg m^2
  Eigen::Vector3d gravity{0.0, 0.0, -9.81};
  Eigen::Vector4d u_min{-3.0, -3.0, 0.5, -0.1};
  Eigen::Vector4d u_max{3.0, 3.0, 9.5, 0.1};

  /// Force/torque that cancels gravity.
  Eigen::Vector4d hover_input() const;

  /// Throws ParameterError naming the violated invariant.
  void validate() const;

  bool operator==(const QuadrotorParams&) const = default;
};

/// Two-axis gimbal with rate inputs. Ranges are closed intervals in rad.
struct GimbalParams {
  double yaw_min = -std::numbers::pi;
  double yaw_max = std::numbers::pi;
  double pitch_min = -std::numbers::pi / 2.0;
  double pitch_max = 0.0;
  Eigen::Vector2d rate_min{-std::numbers::pi, -std::numbers::pi};
  Eigen::Vector2d rate_max{std::numbers::pi, std::numbers::pi};

  void validate() const;

  bool operator==(const GimbalParams&) const = default;
};

struct DiscreteModel {
  Eigen::Matrix<double, kStateDim, kStateDim> A;
  Eigen::Matrix<double, kStateDim, kInputDim> B;
  State c;
  double dt = 0.0;

  State step(const State& x, const Input& u) const { return A * x + B * u + c; }
};

/// Uniform time grid: states at stages 0..n_stages, inputs at 0..n_stages-1.
struct Grid {
  double dt = 0.1;
  int n_stages = 1;

  double horizon() const { return dt * n_stages; }
  double time(int stage) const { return dt * stage; }

  bool operator==(const Grid&) const = default;
};

/// Exact zero-order-hold discretization, computed in closed form.
DiscreteModel build_discrete_model(const QuadrotorParams& quad,
                                   const GimbalParams& gimbal, double dt);

/// Rolls the model forward. `inputs` holds one input per row (N x 6); the
/// result holds N+1 states, one per row.
Eigen::MatrixXd propagate(const DiscreteModel& model, const State& x0,
                          const Eigen::MatrixXd& inputs);

/// Grid stage of each keyframe time, round-half-up to the nearest stage.
/// Throws CollisionError when two keyframes share a stage.
std::vector<int> keyframe_index_map(std::span<const double> times,
                                    double grid_dt);

/// Hover input for the full 6-dimensional input vector (gimbal rates zero).
Input hover_input(const QuadrotorParams& quad);

}  // namespace camtraj
