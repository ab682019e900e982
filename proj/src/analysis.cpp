#include "camtraj/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "camtraj/errors.hpp"

namespace camtraj {
namespace {

constexpr double kRadToDeg = 180.0 / std::numbers::pi;

// Integrated norm of the third difference of the given per-stage series,
// divided by the horizon.
double normalized_third_difference(const Eigen::MatrixXd& series, double dt) {
  const Eigen::Index n = series.rows() - 1;
  if (n < 3) {
    throw InsufficientHorizonError("jerk metrics need at least 3 stages");
  }
  double sum = 0.0;
  for (Eigen::Index i = 3; i <= n; ++i) {
    const Eigen::VectorXd d3 = (series.row(i) - 3.0 * series.row(i - 1) +
                                3.0 * series.row(i - 2) - series.row(i - 3))
                                   .transpose();
    sum += d3.norm() / (dt * dt * dt) * dt;
  }
  return sum / (static_cast<double>(n) * dt);
}

double max_or_zero(const std::vector<double>& v) {
  return v.empty() ? 0.0 : *std::max_element(v.begin(), v.end());
}

MetricDelta delta_of(const MetricReport& a, const MetricReport& b) {
  MetricDelta d;
  d.normalized_jerk = b.normalized_jerk - a.normalized_jerk;
  d.normalized_angular_jerk = b.normalized_angular_jerk - a.normalized_angular_jerk;
  d.max_position_error =
      max_or_zero(b.keyframe_position_errors) - max_or_zero(a.keyframe_position_errors);
  d.max_yaw_error = max_or_zero(b.keyframe_yaw_errors) - max_or_zero(a.keyframe_yaw_errors);
  d.max_pitch_error =
      max_or_zero(b.keyframe_pitch_errors) - max_or_zero(a.keyframe_pitch_errors);
  d.max_interkeyframe_pitch_excursion =
      b.max_interkeyframe_pitch_excursion - a.max_interkeyframe_pitch_excursion;
  return d;
}

}  // namespace

double wrap_to_pi(double angle) {
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  return angle - kTwoPi * std::round(angle / kTwoPi);
}

double normalized_jerk(const Trajectory& traj) {
  return normalized_third_difference(traj.states.leftCols<3>(), traj.grid.dt);
}

double normalized_angular_jerk(const Trajectory& traj) {
  Eigen::MatrixXd angles(traj.states.rows(), 2);
  angles.col(0) = traj.states.col(state::kBodyYaw) + traj.states.col(state::kGimbalYaw);
  angles.col(1) = traj.states.col(state::kGimbalPitch);
  return normalized_third_difference(angles, traj.grid.dt) * kRadToDeg;
}

std::vector<double> camera_pitch_series(const Trajectory& traj) {
  std::vector<double> out(traj.n_stages() + 1);
  for (int i = 0; i <= traj.n_stages(); ++i) out[i] = traj.camera_pitch(i);
  return out;
}

std::vector<double> camera_yaw_series(const Trajectory& traj) {
  std::vector<double> out(traj.n_stages() + 1);
  for (int i = 0; i <= traj.n_stages(); ++i) out[i] = traj.camera_yaw(i);
  return out;
}

KeyframeFit keyframe_fit(const Trajectory& traj, const KeyframeList& keyframes) {
  const auto stages = keyframe_stages(keyframes, traj.grid.dt);
  KeyframeFit fit;
  for (std::size_t j = 0; j < keyframes.size(); ++j) {
    const int i = stages[j];
    if (i > traj.n_stages()) {
      throw IndexError("keyframe " + std::to_string(j) + " lies beyond the trajectory");
    }
    fit.position_errors.push_back((traj.position(i) - keyframes[j].position).norm());
    fit.yaw_errors.push_back(std::abs(wrap_to_pi(traj.camera_yaw(i) - keyframes[j].yaw)));
    fit.pitch_errors.push_back(std::abs(traj.camera_pitch(i) - keyframes[j].pitch));
  }
  return fit;
}

double max_interkeyframe_pitch_excursion(std::span<const double> pitch,
                                         std::span<const int> stages) {
  double worst = 0.0;
  for (std::size_t j = 0; j + 1 < stages.size(); ++j) {
    const int a = stages[j];
    const int b = std::min<int>(stages[j + 1], static_cast<int>(pitch.size()) - 1);
    if (a >= b) continue;
    const double lo = std::min(pitch[a], pitch[b]);
    const double hi = std::max(pitch[a], pitch[b]);
    for (int i = a; i <= b; ++i) {
      worst = std::max({worst, lo - pitch[i], pitch[i] - hi});
    }
  }
  return worst;
}

MetricReport metric_report(const Trajectory& traj, const KeyframeList& keyframes) {
  MetricReport r;
  r.normalized_jerk = normalized_jerk(traj);
  r.normalized_angular_jerk = normalized_angular_jerk(traj);
  KeyframeFit fit = keyframe_fit(traj, keyframes);
  r.keyframe_position_errors = std::move(fit.position_errors);
  r.keyframe_yaw_errors = std::move(fit.yaw_errors);
  r.keyframe_pitch_errors = std::move(fit.pitch_errors);
  const auto stages = keyframe_stages(keyframes, traj.grid.dt);
  const auto pitch = camera_pitch_series(traj);
  r.max_interkeyframe_pitch_excursion = max_interkeyframe_pitch_excursion(pitch, stages);
  return r;
}

std::vector<CameraAngles> lookat_baseline_orientation(
    const Eigen::MatrixXd& camera_positions,
    const std::vector<LookAtKeyframe>& lookat_keyframes, const Grid& grid) {
  if (camera_positions.cols() != 3) {
    throw ShapeError("camera positions must have 3 columns");
  }
  if (lookat_keyframes.empty()) {
    throw ParameterError("at least one look-at keyframe is required");
  }
  for (std::size_t j = 1; j < lookat_keyframes.size(); ++j) {
    if (!(lookat_keyframes[j].time > lookat_keyframes[j - 1].time)) {
      throw ParameterError("look-at keyframe times must be strictly increasing");
    }
  }

  std::vector<CameraAngles> out(camera_positions.rows());
  std::size_t seg = 0;
  double prev_yaw = 0.0;
  for (Eigen::Index i = 0; i < camera_positions.rows(); ++i) {
    const double t = grid.time(static_cast<int>(i));
    while (seg + 1 < lookat_keyframes.size() && t > lookat_keyframes[seg + 1].time) {
      ++seg;
    }
    Eigen::Vector3d target;
    if (t <= lookat_keyframes.front().time) {
      target = lookat_keyframes.front().target;
    } else if (seg + 1 >= lookat_keyframes.size()) {
      target = lookat_keyframes.back().target;
    } else {
      const auto& a = lookat_keyframes[seg];
      const auto& b = lookat_keyframes[seg + 1];
      const double s = (t - a.time) / (b.time - a.time);
      target = (1.0 - s) * a.target + s * b.target;
    }

    const Eigen::Vector3d ray = target - camera_positions.row(i).transpose();
    if (ray.norm() < 1e-9) throw SingularBearingError(static_cast<int>(i));
    const double horizontal = ray.head<2>().norm();
    double yaw = horizontal > 1e-12 ? std::atan2(ray.y(), ray.x()) : prev_yaw;
    if (i > 0) yaw = prev_yaw + wrap_to_pi(yaw - prev_yaw);
    out[i] = {yaw, std::atan2(ray.z(), horizontal)};
    prev_yaw = yaw;
  }
  return out;
}

Comparison compare(const Trajectory& first, const Trajectory& second,
                   const KeyframeList& keyframes) {
  return compare(first, keyframes, second, keyframes);
}

Comparison compare(const Trajectory& first, const KeyframeList& first_keyframes,
                   const Trajectory& second,
                   const KeyframeList& second_keyframes) {
  Comparison c;
  c.first = metric_report(first, first_keyframes);
  c.second = metric_report(second, second_keyframes);
  c.delta = delta_of(c.first, c.second);
  return c;
}

}  // namespace camtraj
