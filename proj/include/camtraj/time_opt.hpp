#pragma once

#include <Eigen/Dense>
#include <optional>
#include <span>
#include <vector>

#include "camtraj/planner.hpp"

namespace camtraj {

enum class EndMode { kFreeEnd, kFixedEnd };

const char* to_string(EndMode mode);

struct TimeOptConfig {
  double w = 1.0;      // cost per grid step; forced to 0 in fixed-end mode
  double h = 0.1;      // finite-difference step, s
  EndMode mode = EndMode::kFixedEnd;
  int max_iters = 50;
  double rel_tol = 1e-4;  // stop when relative score improvement falls below
  double min_gap = 0.1;   // s
  double max_step = 1.0;  // largest time move of the first line-search trial, s

  /// Effective per-step weight (0 in fixed-end mode).
  double step_weight() const { return mode == EndMode::kFixedEnd ? 0.0 : w; }
  void validate(double dt) const;

  bool operator==(const TimeOptConfig&) const = default;
};

/// Everything but the keyframe times needed to plan a trajectory.
struct TimingContext {
  KeyframeList keyframes;  // positions and angles; times are overridden
  QuadrotorParams quad;
  GimbalParams gimbal;
  Weights weights;
  double dt = 0.1;
  std::optional<State> initial_state;
  QpSettings solver;

  PlanResult plan(std::span<const double> times) const;
};

struct TimeObjective {
  double f = 0.0;      // optimal QP objective for these times
  int n_stages = 0;    // N implied by the last keyframe time
  double score = 0.0;  // f + N * w
};

/// f(t) + N w for the given keyframe times. Throws CollisionError when two
/// times share a grid stage.
TimeObjective objective_f(std::span<const double> times,
                          const TimingContext& context, double w);

struct TimeGradient {
  std::vector<int> free_indices;  // keyframe indices being optimized
  Eigen::VectorXd values;         // d score / d t_i for each free index
  TimeObjective base;
};

/// Forward differences per free keyframe time; falls back to a backward
/// difference where t_i + h would break the ordering constraint.
TimeGradient numerical_gradient(std::span<const double> times,
                                const TimingContext& context,
                                const TimeOptConfig& config);

struct TimeOptIteration {
  std::vector<double> times;
  double f = 0.0;
  double score = 0.0;
  int n_stages = 0;
  double step_length = 0.0;
  double gradient_norm = 0.0;
};

struct TimeOptTrace {
  std::vector<TimeOptIteration> iterations;  // [0] is the starting point
};

struct TimeOptResult {
  KeyframeList keyframes;
  TimeOptTrace trace;
  bool no_progress = false;
};

/// Gradient descent with backtracking line search over keyframe times,
/// keeping t_0 = 0 and every gap >= min_gap, with times on the dt grid.
TimeOptResult optimize_times(const KeyframeList& keyframes,
                             const TimeOptConfig& config,
                             const TimingContext& context);

/// Projects candidate times onto the ordered grid-aligned feasible set.
std::vector<double> project_times(std::span<const double> candidate,
                                  std::span<const double> current,
                                  const TimeOptConfig& config, double dt);

}  // namespace camtraj
