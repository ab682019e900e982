#include "camtraj/trajectory_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

#include "camtraj/errors.hpp"
#include "json.hpp"

namespace camtraj {
namespace {

constexpr int kColumns = 18;

void append_number(std::string& out, double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.9g", v == 0.0 ? 0.0 : v);  // no "-0"
  out += buf;
}

nlohmann::json metrics_json(const MetricReport& m) {
  return {{"normalized_jerk", m.normalized_jerk},
          {"normalized_angular_jerk_deg", m.normalized_angular_jerk},
          {"keyframe_position_errors", m.keyframe_position_errors},
          {"keyframe_yaw_errors", m.keyframe_yaw_errors},
          {"keyframe_pitch_errors", m.keyframe_pitch_errors},
          {"max_interkeyframe_pitch_excursion", m.max_interkeyframe_pitch_excursion}};
}

}  // namespace

const char* const kTrajectoryHeader =
    "index,t,x,y,z,yaw_body,yaw_gimbal,pitch_gimbal,vx,vy,vz,yaw_rate_body,"
    "fx,fy,fz,torque_yaw,rate_gimbal_yaw,rate_gimbal_pitch";

std::string format_trajectory(const Trajectory& traj) {
  std::string out = kTrajectoryHeader;
  out += '\n';
  const int n = traj.n_stages();
  for (int i = 0; i <= n; ++i) {
    out += std::to_string(i);
    out += ',';
    append_number(out, traj.grid.time(i));
    for (int k = 0; k < kStateDim; ++k) {
      out += ',';
      append_number(out, traj.states(i, k));
    }
    for (int k = 0; k < kInputDim; ++k) {
      out += ',';
      if (i < n) append_number(out, traj.inputs(i, k));
    }
    out += '\n';
  }
  return out;
}

void write_text_file(const std::string& path, const std::string& body) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path + " for writing");
  f << body;
  if (!f) throw IoError("failed writing " + path);
}

void write_trajectory(const Trajectory& traj, const std::string& path) {
  write_text_file(path, format_trajectory(traj));
}

Trajectory parse_trajectory(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kTrajectoryHeader) {
    throw ValidationError("trajectory file has a missing or unexpected header");
  }
  std::vector<std::vector<std::string>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    if (static_cast<int>(cells.size()) != kColumns) {
      throw ValidationError("trajectory row " + std::to_string(rows.size()) + " has " +
                            std::to_string(cells.size()) + " columns, expected 18");
    }
    rows.push_back(std::move(cells));
  }
  if (rows.size() < 2) throw ValidationError("trajectory needs at least two stages");

  const int n = static_cast<int>(rows.size()) - 1;
  auto num = [&](std::size_t r, int c) {
    try {
      return std::stod(rows[r][c]);
    } catch (const std::exception&) {
      throw ValidationError("bad number in trajectory row " + std::to_string(r) +
                            ", column " + std::to_string(c));
    }
  };
  Trajectory t;
  t.grid.n_stages = n;
  t.grid.dt = num(n, 1) / n;
  t.states.resize(n + 1, kStateDim);
  t.inputs.resize(n, kInputDim);
  for (int i = 0; i <= n; ++i) {
    for (int k = 0; k < kStateDim; ++k) t.states(i, k) = num(i, 2 + k);
    if (i < n) {
      for (int k = 0; k < kInputDim; ++k) t.inputs(i, k) = num(i, 12 + k);
    }
  }
  return t;
}

Trajectory read_trajectory(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open trajectory file " + path);
  std::ostringstream buf;
  buf << f.rdbuf();
  return parse_trajectory(buf.str());
}

std::string metrics_to_json(const MetricReport& m) {
  return metrics_json(m).dump(2) + "\n";
}

std::string format_report(const Trajectory& traj, const ReportContext& ctx) {
  nlohmann::json doc;
  doc["dt"] = traj.grid.dt;
  doc["n_stages"] = traj.grid.n_stages;
  doc["horizon"] = traj.grid.horizon();
  if (ctx.report != nullptr) {
    const SolveReport& r = *ctx.report;
    doc["status"] = to_string(r.status);
    doc["objective"] = r.objective;
    doc["iterations"] = r.iterations;
    doc["wall_time"] = r.wall_time;
    doc["kkt_residuals"] = {{"primal_eq", r.kkt_residuals.primal_eq},
                            {"primal_ineq", r.kkt_residuals.primal_ineq},
                            {"stationarity", r.kkt_residuals.stationarity},
                            {"complementarity", r.kkt_residuals.complementarity}};
  }
  if (ctx.costs != nullptr) {
    doc["costs"] = {{"keyframe", ctx.costs->keyframe},
                    {"derivative", ctx.costs->derivative},
                    {"orientation", ctx.costs->orientation},
                    {"regularization", ctx.costs->regularization}};
  }
  doc["dynamics_residual"] = ctx.dynamics_residual;
  if (ctx.metrics != nullptr) doc["metrics"] = metrics_json(*ctx.metrics);
  return doc.dump(2) + "\n";
}

void write_report(const Trajectory& traj, const ReportContext& ctx,
                  const std::string& path) {
  write_text_file(path, format_report(traj, ctx));
}

}  // namespace camtraj
