#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "camtraj/planner.hpp"

namespace camtraj {

/// Time-integrated jerk magnitude divided by the horizon length, m/s^3.
double normalized_jerk(const Trajectory& traj);

/// Same construction on (camera yaw, camera pitch), reported in deg/s^3.
/// Camera yaw is body yaw + gimbal yaw.
double normalized_angular_jerk(const Trajectory& traj);

struct KeyframeFit {
  std::vector<double> position_errors;  // m
  std::vector<double> yaw_errors;       // rad
  std::vector<double> pitch_errors;     // rad
};

KeyframeFit keyframe_fit(const Trajectory& traj, const KeyframeList& keyframes);

/// Largest distance of the pitch series from the envelope spanned by its own
/// values at the two bracketing keyframe stages, over all keyframe segments.
double max_interkeyframe_pitch_excursion(std::span<const double> pitch,
                                         std::span<const int> stages);

std::vector<double> camera_pitch_series(const Trajectory& traj);
std::vector<double> camera_yaw_series(const Trajectory& traj);

struct MetricReport {
  double normalized_jerk = 0.0;          // m/s^3
  double normalized_angular_jerk = 0.0;  // deg/s^3
  std::vector<double> keyframe_position_errors;
  std::vector<double> keyframe_yaw_errors;
  std::vector<double> keyframe_pitch_errors;
  double max_interkeyframe_pitch_excursion = 0.0;  // rad
};

MetricReport metric_report(const Trajectory& traj,
                           const KeyframeList& keyframes);

struct LookAtKeyframe {
  Eigen::Vector3d target = Eigen::Vector3d::Zero();
  double time = 0.0;

  bool operator==(const LookAtKeyframe&) const = default;
};

struct CameraAngles {
  double yaw = 0.0;
  double pitch = 0.0;
};

/// Look-at baseline: the target moves on straight segments between look-at
/// keyframes; yaw and pitch follow the camera-to-target ray. Rows of
/// `camera_positions` are per-stage positions.
std::vector<CameraAngles> lookat_baseline_orientation(
    const Eigen::MatrixXd& camera_positions,
    const std::vector<LookAtKeyframe>& lookat_keyframes, const Grid& grid);

struct MetricDelta {
  double normalized_jerk = 0.0;
  double normalized_angular_jerk = 0.0;
  double max_position_error = 0.0;
  double max_yaw_error = 0.0;
  double max_pitch_error = 0.0;
  double max_interkeyframe_pitch_excursion = 0.0;
};

struct Comparison {
  MetricReport first;
  MetricReport second;
  MetricDelta delta;  // second - first
};

Comparison compare(const Trajectory& first, const Trajectory& second,
                   const KeyframeList& keyframes);

/// Variant for trajectories planned with different keyframe timings.
Comparison compare(const Trajectory& first, const KeyframeList& first_keyframes,
                   const Trajectory& second,
                   const KeyframeList& second_keyframes);

double wrap_to_pi(double angle);

}  // namespace camtraj
