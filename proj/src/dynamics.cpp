#include "camtraj/dynamics.hpp"

#include <cmath>
#include <string>

#include "camtraj/errors.hpp"

namespace camtraj {

Eigen::Vector4d QuadrotorParams::hover_input() const {
  Eigen::Vector4d u;
  u << -mass * gravity, 0.0;
  return u;
}

void QuadrotorParams::validate() const {
  if (!(mass > 0.0) || !std::isfinite(mass)) {
    throw ParameterError("quadrotor mass must be positive");
  }
  if (!(inertia_z > 0.0) || !std::isfinite(inertia_z)) {
    throw ParameterError("quadrotor inertia_z must be positive");
  }
  if (!gravity.allFinite()) {
    throw ParameterError("gravity must be finite");
  }
  const Eigen::Vector4d hover = hover_input();
  for (int k = 0; k < 4; ++k) {
    if (!(u_min[k] < u_max[k])) {
      throw ParameterError("u_min[" + std::to_string(k) +
                           "] must be below u_max[" + std::to_string(k) + "]");
    }
    if (!(u_min[k] < hover[k] && hover[k] < u_max[k])) {
      throw ParameterError("hover input component " + std::to_string(k) +
                           " lies outside the open input box");
    }
  }
}

void GimbalParams::validate() const {
  if (!(yaw_min < yaw_max)) throw ParameterError("gimbal yaw range is empty");
  if (!(pitch_min < pitch_max)) {
    throw ParameterError("gimbal pitch range is empty");
  }
  for (int k = 0; k < 2; ++k) {
    if (!(rate_min[k] < 0.0 && 0.0 < rate_max[k])) {
      throw ParameterError("gimbal rate bounds must bracket zero");
    }
  }
}

DiscreteModel build_discrete_model(const QuadrotorParams& quad,
                                   const GimbalParams& gimbal, double dt) {
  if (!(dt > 0.0) || !std::isfinite(dt)) {
    throw ParameterError("dt must be positive");
  }
  quad.validate();
  gimbal.validate();

  using namespace state;
  DiscreteModel m;
  m.dt = dt;
  m.A.setIdentity();
  m.B.setZero();
  m.c.setZero();

  const double half_dt2 = 0.5 * dt * dt;

  // Translational double integrator: r' = v, v' = F/m + g.
  for (int k = 0; k < 3; ++k) {
    m.A(kX + k, kVx + k) = dt;
    m.B(kX + k, input::kFx + k) = half_dt2 / quad.mass;
    m.B(kVx + k, input::kFx + k) = dt / quad.mass;
    m.c[kX + k] = half_dt2 * quad.gravity[k];
    m.c[kVx + k] = dt * quad.gravity[k];
  }

  // Body yaw double integrator driven by torque.
  m.A(kBodyYaw, kBodyYawRate) = dt;
  m.B(kBodyYaw, input::kTorque) = half_dt2 / quad.inertia_z;
  m.B(kBodyYawRate, input::kTorque) = dt / quad.inertia_z;

  // Gimbal angles integrate their rate inputs.
  m.B(kGimbalYaw, input::kGimbalYawRate) = dt;
  m.B(kGimbalPitch, input::kGimbalPitchRate) = dt;

  return m;
}

Eigen::MatrixXd propagate(const DiscreteModel& model, const State& x0,
                          const Eigen::MatrixXd& inputs) {
  if (inputs.cols() != kInputDim) {
    throw ShapeError("propagate expects " + std::to_string(kInputDim) +
                     " input columns, got " + std::to_string(inputs.cols()));
  }
  const Eigen::Index n = inputs.rows();
  Eigen::MatrixXd states(n + 1, kStateDim);
  states.row(0) = x0.transpose();
  State x = x0;
  for (Eigen::Index i = 0; i < n; ++i) {
    x = model.step(x, inputs.row(i).transpose());
    states.row(i + 1) = x.transpose();
  }
  return states;
}

std::vector<int> keyframe_index_map(std::span<const double> times,
                                    double grid_dt) {
  if (!(grid_dt > 0.0)) throw ParameterError("grid dt must be positive");
  if (times.empty()) throw ParameterError("at least one keyframe is required");
  if (times.front() != 0.0) {
    throw ParameterError("first keyframe time must be 0");
  }
  std::vector<int> stages;
  stages.reserve(times.size());
  for (std::size_t j = 0; j < times.size(); ++j) {
    if (j > 0 && !(times[j] > times[j - 1])) {
      throw ParameterError("keyframe times must be strictly increasing (index " +
                           std::to_string(j) + ")");
    }
    // Half-up rounding; the small bias absorbs representation error in t/dt.
    const int stage =
        static_cast<int>(std::floor(times[j] / grid_dt + 0.5 + 1e-9));
    if (j > 0 && stage <= stages.back()) {
      throw CollisionError(j - 1, j, stage);
    }
    stages.push_back(stage);
  }
  return stages;
}

Input hover_input(const QuadrotorParams& quad) {
  Input u = Input::Zero();
  u.head<4>() = quad.hover_input();
  return u;
}

}  // namespace camtraj
