#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "camtraj/analysis.hpp"
#include "camtraj/dynamics.hpp"
#include "camtraj/planner.hpp"
#include "camtraj/time_opt.hpp"

namespace camtraj {

/// Everything needed to plan one shot. Parsed from a strict JSON document;
/// see README.md for the schema.
struct SceneSpec {
  std::string description;
  double dt = 0.1;
  QuadrotorParams quadrotor;
  GimbalParams gimbal;
  Weights weights;
  KeyframeList keyframes;
  std::optional<State> initial_state;
  std::vector<LookAtKeyframe> lookat_keyframes;
  std::optional<TimeOptConfig> time_opt;

  /// Checks every nested invariant; throws FieldError with the field path.
  void validate() const;

  TimingContext timing_context() const;
  PlanOptions plan_options() const;

  bool operator==(const SceneSpec&) const = default;
};

/// Throws ParseError (line/column) on malformed JSON, FieldError on schema or
/// invariant violations, CollisionError when keyframes share a grid stage.
SceneSpec parse_scene(std::string_view text);

std::string serialize_scene(const SceneSpec& scene);

SceneSpec load_scene(const std::string& path);

}  // namespace camtraj
