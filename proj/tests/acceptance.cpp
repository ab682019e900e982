// Acceptance suite: one PASS/FAIL line per criterion, exit code 1 on any FAIL.

#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "camtraj/analysis.hpp"
#include "camtraj/dynamics.hpp"
#include "camtraj/planner.hpp"
#include "camtraj/scene.hpp"
#include "camtraj/time_opt.hpp"
#include "camtraj/trajectory_io.hpp"
#include "oracles/dense_qp.hpp"
#include "oracles/zoh_matrix_exp.hpp"
#include "test_support.hpp"

using namespace camtraj;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

SceneSpec scene(const std::string& name) {
  return load_scene(test::source_path("scenes/" + name));
}

PlanResult plan_scene(const SceneSpec& s) {
  return plan_trajectory(s.keyframes, s.quadrotor, s.gimbal, s.weights, s.dt, s.plan_options());
}

// Largest bound violation over inputs (all stages) and gimbal angles (stages 1..N).
struct Violations {
  double input = 0.0;
  double gimbal_rate = 0.0;
  double gimbal_angle = 0.0;
};

Violations bound_violations(const Trajectory& t, const QuadrotorParams& q, const GimbalParams& g) {
  Violations v;
  auto excess = [](double x, double lo, double hi) { return std::max({0.0, lo - x, x - hi}); };
  for (int i = 0; i < t.n_stages(); ++i) {
    for (int k = 0; k < 4; ++k) {
      v.input = std::max(v.input, excess(t.inputs(i, k), q.u_min[k], q.u_max[k]));
    }
    for (int k = 0; k < 2; ++k) {
      v.gimbal_rate =
          std::max(v.gimbal_rate, excess(t.inputs(i, 4 + k), g.rate_min[k], g.rate_max[k]));
    }
  }
  for (int i = 1; i <= t.n_stages(); ++i) {
    v.gimbal_angle = std::max(
        v.gimbal_angle, excess(t.states(i, state::kGimbalYaw), g.yaw_min, g.yaw_max));
    v.gimbal_angle = std::max(
        v.gimbal_angle, excess(t.states(i, state::kGimbalPitch), g.pitch_min, g.pitch_max));
  }
  return v;
}

struct TimingComparison {
  MetricReport fixed;
  MetricReport optimized;
  std::vector<double> times;
};

TimingComparison optimize_scene(const SceneSpec& s) {
  const TimeOptConfig config = s.time_opt.value_or(TimeOptConfig{});
  const TimeOptResult opt = optimize_times(s.keyframes, config, s.timing_context());
  SceneSpec optimized = s;
  optimized.keyframes = opt.keyframes;
  const PlanResult a = plan_scene(s);
  const PlanResult b = plan_scene(optimized);
  TimingComparison out;
  out.fixed = metric_report(a.trajectory, a.keyframes);
  out.optimized = metric_report(b.trajectory, b.keyframes);
  for (const Keyframe& k : opt.keyframes) out.times.push_back(k.time);
  return out;
}

Outcome ac1_feasibility() {
  std::mt19937 rng(2024);
  std::uniform_int_distribution<int> count(2, 8);
  std::uniform_int_distribution<int> tenths(50, 300);
  const auto t0 = std::chrono::steady_clock::now();
  double worst_dyn = 0.0;
  Violations worst;
  for (int trial = 0; trial < 50; ++trial) {
    const int m = count(rng);
    const double horizon = tenths(rng) * 0.1;
    const KeyframeList kfs = test::random_keyframes(rng, m, horizon, 0.1, 0.5);
    const QuadrotorParams quad = trial % 2 == 0 ? QuadrotorParams{} : test::random_quad(rng);
    const GimbalParams gimbal;
    const PlanResult r = plan_trajectory(kfs, quad, gimbal, Weights{}, 0.1);
    const DiscreteModel model = build_discrete_model(quad, gimbal, 0.1);
    worst_dyn = std::max(worst_dyn, dynamics_residual(r.trajectory, model));
    const Violations v = bound_violations(r.trajectory, quad, gimbal);
    worst.input = std::max(worst.input, v.input);
    worst.gimbal_rate = std::max(worst.gimbal_rate, v.gimbal_rate);
    worst.gimbal_angle = std::max(worst.gimbal_angle, v.gimbal_angle);
  }
  const double elapsed = seconds_since(t0);
  Outcome o;
  o.pass = worst_dyn <= 1e-6 && worst.input <= 1e-8 && worst.gimbal_rate <= 1e-8 &&
           worst.gimbal_angle <= 1e-8 && elapsed < 120.0;
  o.detail = fmt(
      "50 scenes: dynamics residual %.2e, input excess %.2e, gimbal rate excess %.2e, "
      "gimbal angle excess %.2e, %.1f s",
      worst_dyn, worst.input, worst.gimbal_rate, worst.gimbal_angle, elapsed);
  return o;
}

Outcome ac2_oracle() {
  std::mt19937 rng(99);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const auto t0 = std::chrono::steady_clock::now();
  double worst = 0.0;
  int max_n = 0;
  bool all_converged = true;
  for (int trial = 0; trial < 10; ++trial) {
    const double dt = trial % 2 == 0 ? 0.1 : 0.2;
    const int n = 15 + static_cast<int>(unit(rng) * 11);  // 15..25 stages
    const int m = 2 + trial % 3;
    const KeyframeList kfs =
        unwrap_yaws(test::random_keyframes(rng, m, n * dt, dt, 2 * dt));
    const QuadrotorParams quad = trial < 5 ? QuadrotorParams{} : test::random_quad(rng);
    const GimbalParams gimbal;
    const Weights weights;
    const Grid grid{dt, n};
    const DiscreteModel model = build_discrete_model(quad, gimbal, dt);
    const State x0 = default_initial_state(kfs, gimbal);
    const TrajectoryQp tq = assemble_qp(kfs, model, grid, weights, quad, gimbal, x0);
    const QpSolution sparse = solve_qp(tq.qp);
    const auto dense =
        oracle::dense_active_set_solve(tq.qp, test::hover_solution(tq.layout, model, quad, x0));
    all_converged = all_converged && sparse.report.status == SolveStatus::kOptimal &&
                    dense.converged;
    const int ns = tq.layout.num_states();
    worst = std::max(worst, (sparse.x.head(ns) - dense.x.head(ns)).lpNorm<Eigen::Infinity>());
    max_n = std::max(max_n, n);
  }
  const double elapsed = seconds_since(t0);
  Outcome o;
  o.pass = all_converged && worst <= 1e-5 && max_n <= 25 && elapsed < 60.0;
  o.detail = fmt("10 instances (N <= %d): max state difference %.2e%s, %.1f s", max_n, worst,
                 all_converged ? "" : ", a solve did not converge", elapsed);
  return o;
}

Outcome ac3_discretization() {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const QuadrotorParams quad = test::random_quad(rng);
    const double dt = 0.01 + 0.3 * unit(rng);
    const DiscreteModel model = build_discrete_model(quad, GimbalParams{}, dt);
    const auto ref = oracle::zoh_by_matrix_exponential(quad, dt);
    worst = std::max({worst, (model.A - ref.A).cwiseAbs().maxCoeff(),
                      (model.B - ref.B).cwiseAbs().maxCoeff(),
                      (model.c - ref.c).cwiseAbs().maxCoeff()});
  }
  Outcome o;
  o.pass = worst <= 1e-10;
  o.detail = fmt("20 parameter sets: max difference %.2e", worst);
  return o;
}

Outcome ac4_unequal_spacing() {
  const auto t0 = std::chrono::steady_clock::now();
  const SceneSpec s = scene("unequal_spacing.json");
  const TimingComparison c = optimize_scene(s);
  const double elapsed = seconds_since(t0);
  const double reduction = 1.0 - c.optimized.normalized_jerk / c.fixed.normalized_jerk;
  Outcome o;
  o.pass = s.time_opt && s.time_opt->mode == EndMode::kFixedEnd && reduction >= 0.20 &&
           elapsed < 300.0;
  o.detail = fmt("jerk %.4f -> %.4f m/s^3 (%.1f%% lower), %.1f s", c.fixed.normalized_jerk,
                 c.optimized.normalized_jerk, 100.0 * reduction, elapsed);
  return o;
}

Outcome ac5_scripted_scenarios() {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  o.pass = true;
  for (const char* name : {"orbit_uneven.json", "flyby_climb.json"}) {
    const TimingComparison c = optimize_scene(scene(name));
    const bool ok = c.optimized.normalized_jerk < c.fixed.normalized_jerk &&
                    c.optimized.normalized_angular_jerk < c.fixed.normalized_angular_jerk;
    o.pass = o.pass && ok;
    o.detail += fmt("%s jerk %.4f -> %.4f, angular %.3f -> %.3f deg/s^3; ", name,
                    c.fixed.normalized_jerk, c.optimized.normalized_jerk,
                    c.fixed.normalized_angular_jerk, c.optimized.normalized_angular_jerk);
  }
  const double elapsed = seconds_since(t0);
  o.pass = o.pass && elapsed < 300.0;
  o.detail += fmt("%.1f s", elapsed);
  return o;
}

Outcome ac6_tilt() {
  const SceneSpec s = scene("lookat_tilt.json");
  const PlanResult r = plan_scene(s);
  const Trajectory& t = r.trajectory;
  const auto baseline =
      lookat_baseline_orientation(t.states.leftCols<3>(), s.lookat_keyframes, t.grid);
  std::vector<double> base_pitch;
  for (const auto& a : baseline) base_pitch.push_back(a.pitch);
  std::vector<double> lookat_times;
  for (const auto& k : s.lookat_keyframes) lookat_times.push_back(k.time);
  const double base_exc =
      max_interkeyframe_pitch_excursion(base_pitch, keyframe_index_map(lookat_times, s.dt));
  const auto pitch = camera_pitch_series(t);
  const double plan_exc = max_interkeyframe_pitch_excursion(pitch, r.stages);

  double lo = s.keyframes.front().pitch;
  double hi = lo;
  for (const Keyframe& k : s.keyframes) {
    lo = std::min(lo, k.pitch);
    hi = std::max(hi, k.pitch);
  }
  double envelope_excess = 0.0;
  for (double p : pitch) envelope_excess = std::max({envelope_excess, lo - p, p - hi});
  const double margin_deg = test::deg(base_exc - plan_exc);
  Outcome o;
  o.pass = margin_deg >= 10.0 && envelope_excess <= 1e-3;
  o.detail = fmt("excursion baseline %.2f deg, planner %.3f deg; envelope excess %.2e rad",
                 test::deg(base_exc), test::deg(plan_exc), envelope_excess);
  return o;
}

Outcome ac7_yaw_split() {
  const SceneSpec s = scene("yaw_sweep.json");
  const PlanResult r = plan_scene(s);
  const KeyframeFit fit = keyframe_fit(r.trajectory, r.keyframes);
  double worst = 0.0;
  for (double e : fit.yaw_errors) worst = std::max(worst, std::abs(e));
  const double sweep = r.keyframes.back().yaw - r.keyframes.front().yaw;
  const double gimbal_excess =
      bound_violations(r.trajectory, s.quadrotor, s.gimbal).gimbal_angle;
  Outcome o;
  o.pass = worst < 1e-3 && std::abs(test::deg(sweep) - 270.0) < 1e-6 &&
           s.gimbal.yaw_max <= test::rad(90.0) + 1e-12 &&
           s.gimbal.yaw_min >= -test::rad(90.0) - 1e-12 && gimbal_excess <= 1e-8;
  o.detail = fmt("%.0f deg sweep, gimbal yaw within +/-%.0f deg: max yaw residual %.2e rad",
                 test::deg(sweep), test::deg(s.gimbal.yaw_max), worst);
  return o;
}

Outcome ac8_gradient() {
  std::mt19937 rng(31);
  std::uniform_int_distribution<int> count(3, 5);
  std::uniform_int_distribution<int> tenths(80, 140);
  const auto t0 = std::chrono::steady_clock::now();
  int agree = 0;
  int monotone = 0;
  for (int trial = 0; trial < 10; ++trial) {
    const KeyframeList kfs = test::random_keyframes(rng, count(rng), tenths(rng) * 0.1, 0.1);
    TimingContext ctx;
    ctx.keyframes = kfs;
    ctx.dt = 0.1;
    TimeOptConfig config;
    config.mode = trial % 2 == 0 ? EndMode::kFixedEnd : EndMode::kFreeEnd;
    config.w = config.mode == EndMode::kFreeEnd ? 1e-4 : 0.0;
    config.h = 0.1;
    config.min_gap = 0.5;
    config.max_iters = 15;
    const double w = config.step_weight();

    std::vector<double> t;
    for (const Keyframe& k : kfs) t.push_back(k.time);
    const TimeGradient g = numerical_gradient(t, ctx, config);
    bool signs = true;
    for (std::size_t k = 0; k < g.free_indices.size(); ++k) {
      const int i = g.free_indices[k];
      std::vector<double> plus = t;
      std::vector<double> minus = t;
      plus[i] += config.h;
      minus[i] -= config.h;
      const double central = (objective_f(plus, ctx, w).score -
                              objective_f(minus, ctx, w).score) /
                             (2.0 * config.h);
      signs = signs && g.values[static_cast<Eigen::Index>(k)] * central > 0.0;
    }
    agree += signs ? 1 : 0;

    const TimeOptResult opt = optimize_times(kfs, config, ctx);
    bool non_increasing = true;
    const auto& it = opt.trace.iterations;
    for (std::size_t k = 1; k < it.size(); ++k) {
      non_increasing = non_increasing && it[k].score <= it[k - 1].score;
    }
    monotone += non_increasing ? 1 : 0;
  }
  const double elapsed = seconds_since(t0);
  Outcome o;
  o.pass = agree >= 9 && monotone == 10 && elapsed < 300.0;
  o.detail = fmt("sign agreement on %d/10 instances, monotone traces %d/10, %.1f s", agree,
                 monotone, elapsed);
  return o;
}

Outcome ac9_performance() {
  std::mt19937 rng(20);
  const KeyframeList kfs = test::random_keyframes(rng, 6, 20.0, 0.1);
  const auto t0 = std::chrono::steady_clock::now();
  const PlanResult r = plan_trajectory(kfs, QuadrotorParams{}, GimbalParams{}, Weights{}, 0.1);
  const double elapsed = seconds_since(t0);
  Outcome o;
  o.pass = r.trajectory.n_stages() == 200 && elapsed < 10.0;
  o.detail = fmt("20 s scene, %d stages: %.3f s wall (%d interior-point iterations)",
                 r.trajectory.n_stages(), elapsed, r.report.iterations);
  return o;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string("\"") + CAMTRAJ_CLI_PATH + "\" " + args + " >/dev/null";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Outcome ac10_determinism() {
  const fs::path dir = fs::temp_directory_path() / ("camtraj_acceptance_" + std::to_string(::getpid()));
  fs::remove_all(dir);
  fs::create_directories(dir);
  bool identical = true;
  int files = 0;
  for (const char* name : {"orbit_uneven.json", "yaw_sweep.json", "lookat_tilt.json"}) {
    const std::string path = test::source_path(std::string("scenes/") + name);
    for (const char* run : {"a", "b"}) {
      if (run_cli("plan \"" + path + "\" --out-dir \"" + (dir / name / run).string() + "\"") != 0)
        identical = false;
    }
    const std::string a = slurp(dir / name / "a" / "trajectory.csv");
    identical = identical && !a.empty() && a == slurp(dir / name / "b" / "trajectory.csv");
    ++files;
  }
  const std::string topt = test::source_path("scenes/unequal_spacing.json");
  for (const char* run : {"a", "b"}) {
    if (run_cli("time-opt \"" + topt + "\" --out-dir \"" + (dir / "topt" / run).string() + "\"") != 0)
      identical = false;
  }
  for (const char* out : {"fixed_timing.csv", "optimized.csv", "optimized_scene.json"}) {
    const std::string a = slurp(dir / "topt" / "a" / out);
    identical = identical && !a.empty() && a == slurp(dir / "topt" / "b" / out);
    ++files;
  }
  fs::remove_all(dir);

  int round_trips = 0;
  bool scenes_ok = true;
  for (const std::string& path : test::shipped_scenes()) {
    const SceneSpec s = load_scene(path);
    const std::string text = serialize_scene(s);
    scenes_ok = scenes_ok && parse_scene(text) == s && serialize_scene(parse_scene(text)) == text;
    ++round_trips;
  }
  std::mt19937 rng(123);
  for (int trial = 0; trial < 50; ++trial) {
    const SceneSpec s = test::random_scene(rng);
    const std::string text = serialize_scene(s);
    scenes_ok = scenes_ok && parse_scene(text) == s && serialize_scene(parse_scene(text)) == text;
    ++round_trips;
  }
  Outcome o;
  o.pass = identical && scenes_ok;
  o.detail = fmt("%d output files byte-identical across runs: %s; %d scene round trips: %s",
                 files, identical ? "yes" : "no", round_trips, scenes_ok ? "identity" : "MISMATCH");
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"AC1 ", ac1_feasibility},       {"AC2 ", ac2_oracle},
      {"AC3 ", ac3_discretization},    {"AC4 ", ac4_unequal_spacing},
      {"AC5 ", ac5_scripted_scenarios}, {"AC6 ", ac6_tilt},
      {"AC7 ", ac7_yaw_split},         {"AC8 ", ac8_gradient},
      {"AC9 ", ac9_performance},       {"AC10", ac10_determinism},
  };
  int failures = 0;
  for (const auto& [id, check] : criteria) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    failures += o.pass ? 0 : 1;
    std::cout << id << ' ' << (o.pass ? "PASS" : "FAIL") << "  " << o.detail << std::endl;
  }
  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " failed")
            << std::endl;
  return failures == 0 ? 0 : 1;
}
