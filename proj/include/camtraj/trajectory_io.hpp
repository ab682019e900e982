#pragma once

#include <string>

#include "camtraj/analysis.hpp"
#include "camtraj/planner.hpp"

namespace camtraj {

/// Header of the trajectory table; 18 comma-separated columns.
extern const char* const kTrajectoryHeader;

/// One row per stage, 9 significant digits, input columns empty on the
/// final row.
std::string format_trajectory(const Trajectory& traj);
void write_trajectory(const Trajectory& traj, const std::string& path);

Trajectory parse_trajectory(const std::string& text);
Trajectory read_trajectory(const std::string& path);

struct ReportContext {
  const SolveReport* report = nullptr;
  const CostBreakdown* costs = nullptr;
  const MetricReport* metrics = nullptr;
  double dynamics_residual = 0.0;
};

std::string format_report(const Trajectory& traj, const ReportContext& ctx);
void write_report(const Trajectory& traj, const ReportContext& ctx,
                  const std::string& path);

std::string metrics_to_json(const MetricReport& m);

void write_text_file(const std::string& path, const std::string& body);

}  // namespace camtraj
