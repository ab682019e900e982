#include "camtraj/cli.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "camtraj/analysis.hpp"
#include "camtraj/errors.hpp"
#include "camtraj/scene.hpp"
#include "camtraj/time_opt.hpp"
#include "camtraj/trajectory_io.hpp"
#include "json.hpp"

namespace camtraj {
namespace {

namespace fs = std::filesystem;
constexpr double kRadToDeg = 180.0 / 3.14159265358979323846;

struct Overrides {
  std::optional<double> dt;
  std::string weights;
  std::string mode;
  std::optional<double> w;
  std::optional<double> h;
  std::optional<int> max_iters;
  std::optional<int> qp_max_iter;
  std::string out_dir = ".";
};

std::array<double, 3> parse_triple(const std::string& key, const std::string& v) {
  std::array<double, 3> out{};
  std::istringstream in(v);
  std::string part;
  std::size_t k = 0;
  while (std::getline(in, part, ':')) {
    if (k >= 3) break;
    out[k++] = std::stod(part);
  }
  if (k != 3 || in.rdbuf()->in_avail() > 0) {
    throw FieldError("--weights " + key, "expected three values a:b:c");
  }
  return out;
}

// --weights "keyframe=1e4,position_derivative=0:0:1,..."
void apply_weight_overrides(const std::string& spec, Weights& w) {
  std::istringstream in(spec);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (item.empty()) continue;
    const auto eq = item.find('=');
    if (eq == std::string::npos) {
      throw FieldError("--weights", "expected key=value, got '" + item + "'");
    }
    const std::string key = item.substr(0, eq);
    const std::string value = item.substr(eq + 1);
    try {
      if (key == "keyframe") {
        w.keyframe = std::stod(value);
      } else if (key == "orientation") {
        w.orientation = std::stod(value);
      } else if (key == "gimbal_centering") {
        w.gimbal_centering = std::stod(value);
      } else if (key == "input_regularization") {
        w.input_regularization = std::stod(value);
      } else if (key == "position_derivative") {
        w.position_derivative = parse_triple(key, value);
      } else if (key == "angle_derivative") {
        w.angle_derivative = parse_triple(key, value);
      } else {
        throw FieldError("--weights " + key, "unknown weight");
      }
    } catch (const std::invalid_argument&) {
      throw FieldError("--weights " + key, "expected a number");
    } catch (const std::out_of_range&) {
      throw FieldError("--weights " + key, "number out of range");
    }
  }
}

SceneSpec load_with_overrides(const std::string& path, const Overrides& o) {
  SceneSpec scene = load_scene(path);
  if (o.dt) scene.dt = *o.dt;
  if (!o.weights.empty()) apply_weight_overrides(o.weights, scene.weights);
  scene.validate();
  return scene;
}

TimeOptConfig time_config(const SceneSpec& scene, const Overrides& o) {
  TimeOptConfig c;
  if (scene.time_opt) {
    c = *scene.time_opt;
  } else {
    c.h = scene.dt;
    c.min_gap = scene.dt;
  }
  if (!o.mode.empty()) {
    if (o.mode == "free-end") {
      c.mode = EndMode::kFreeEnd;
    } else if (o.mode == "fixed-end") {
      c.mode = EndMode::kFixedEnd;
    } else {
      throw FieldError("--mode", "expected free-end or fixed-end");
    }
  }
  if (o.w) c.w = *o.w;
  if (o.h) c.h = *o.h;
  if (o.max_iters) c.max_iters = *o.max_iters;
  // h and min_gap may not fall below a (possibly overridden) dt.
  if (!o.h && c.h < scene.dt) c.h = scene.dt;
  if (c.min_gap < scene.dt) c.min_gap = scene.dt;
  SceneSpec check = scene;
  check.time_opt = c;
  check.validate();
  return c;
}

std::string out_path(const Overrides& o, const std::string& name) {
  fs::create_directories(o.out_dir);
  return (fs::path(o.out_dir) / name).string();
}

void print_metrics(std::ostream& os, const MetricReport& m) {
  char buf[160];
  std::snprintf(buf, sizeof(buf), "normalized jerk          %.6g m/s^3\n", m.normalized_jerk);
  os << buf;
  std::snprintf(buf, sizeof(buf), "normalized angular jerk  %.6g deg/s^3\n",
                m.normalized_angular_jerk);
  os << buf;
  for (std::size_t j = 0; j < m.keyframe_position_errors.size(); ++j) {
    std::snprintf(buf, sizeof(buf),
                  "keyframe %zu: position error %.4g m, yaw error %.4g rad, pitch error %.4g rad\n",
                  j, m.keyframe_position_errors[j], m.keyframe_yaw_errors[j],
                  m.keyframe_pitch_errors[j]);
    os << buf;
  }
  if (!m.keyframe_position_errors.empty()) {
    std::snprintf(buf, sizeof(buf), "max inter-keyframe pitch excursion %.4g rad\n",
                  m.max_interkeyframe_pitch_excursion);
    os << buf;
  }
}

nlohmann::json comparison_json(const Comparison& c, const std::string& first,
                               const std::string& second) {
  auto metrics = [](const MetricReport& m) { return nlohmann::json::parse(metrics_to_json(m)); };
  return {{"labels", {first, second}},
          {first, metrics(c.first)},
          {second, metrics(c.second)},
          {"delta",
           {{"normalized_jerk", c.delta.normalized_jerk},
            {"normalized_angular_jerk_deg", c.delta.normalized_angular_jerk},
            {"max_position_error", c.delta.max_position_error},
            {"max_yaw_error", c.delta.max_yaw_error},
            {"max_pitch_error", c.delta.max_pitch_error},
            {"max_interkeyframe_pitch_excursion",
             c.delta.max_interkeyframe_pitch_excursion}}}};
}

void print_comparison(std::ostream& os, const Comparison& c, const std::string& first,
                      const std::string& second) {
  char buf[200];
  std::snprintf(buf, sizeof(buf), "%-26s %14s %14s %14s\n", "", first.c_str(),
                second.c_str(), "delta");
  os << buf;
  std::snprintf(buf, sizeof(buf), "%-26s %14.6g %14.6g %14.6g\n", "jerk [m/s^3]",
                c.first.normalized_jerk, c.second.normalized_jerk, c.delta.normalized_jerk);
  os << buf;
  std::snprintf(buf, sizeof(buf), "%-26s %14.6g %14.6g %14.6g\n", "angular jerk [deg/s^3]",
                c.first.normalized_angular_jerk, c.second.normalized_angular_jerk,
                c.delta.normalized_angular_jerk);
  os << buf;
  std::snprintf(buf, sizeof(buf), "%-26s %14.6g %14.6g %14.6g\n", "max position error [m]",
                c.first.keyframe_position_errors.empty()
                    ? 0.0
                    : *std::max_element(c.first.keyframe_position_errors.begin(),
                                        c.first.keyframe_position_errors.end()),
                c.second.keyframe_position_errors.empty()
                    ? 0.0
                    : *std::max_element(c.second.keyframe_position_errors.begin(),
                                        c.second.keyframe_position_errors.end()),
                c.delta.max_position_error);
  os << buf;
}

void write_plan(const PlanResult& plan, const DiscreteModel& model, const std::string& csv,
                const std::string& report) {
  const MetricReport metrics = metric_report(plan.trajectory, plan.keyframes);
  write_trajectory(plan.trajectory, csv);
  ReportContext ctx;
  ctx.report = &plan.report;
  ctx.costs = &plan.costs;
  ctx.metrics = &metrics;
  ctx.dynamics_residual = dynamics_residual(plan.trajectory, model);
  write_report(plan.trajectory, ctx, report);
}

QpSettings solver_settings(QpSettings s, const Overrides& o) {
  if (o.qp_max_iter) {
    if (*o.qp_max_iter < 1) throw FieldError("--qp-max-iter", "must be >= 1");
    s.max_iter = *o.qp_max_iter;
  }
  return s;
}

PlanResult plan_scene(const SceneSpec& scene, const Overrides& o) {
  PlanOptions options = scene.plan_options();
  options.solver = solver_settings(options.solver, o);
  return plan_trajectory(scene.keyframes, scene.quadrotor, scene.gimbal, scene.weights,
                         scene.dt, options);
}

int cmd_plan(const std::string& scene_path, const Overrides& o) {
  const SceneSpec scene = load_with_overrides(scene_path, o);
  const PlanResult plan = plan_scene(scene, o);
  const DiscreteModel model = build_discrete_model(scene.quadrotor, scene.gimbal, scene.dt);
  const std::string csv = out_path(o, "trajectory.csv");
  const std::string report = out_path(o, "report.json");
  write_plan(plan, model, csv, report);
  std::cout << "planned " << plan.trajectory.n_stages() << " stages ("
            << plan.trajectory.grid.horizon() << " s), objective " << plan.report.objective
            << "\nwrote " << csv << "\nwrote " << report << "\n";
  return kExitOk;
}

int cmd_time_opt(const std::string& scene_path, const Overrides& o) {
  const SceneSpec scene = load_with_overrides(scene_path, o);
  const TimeOptConfig config = time_config(scene, o);
  const DiscreteModel model = build_discrete_model(scene.quadrotor, scene.gimbal, scene.dt);

  const PlanResult fixed = plan_scene(scene, o);
  TimingContext context = scene.timing_context();
  context.solver = solver_settings(context.solver, o);
  const TimeOptResult opt = optimize_times(scene.keyframes, config, context);
  SceneSpec optimized_scene = scene;
  optimized_scene.keyframes = opt.keyframes;
  optimized_scene.time_opt = config;
  const PlanResult optimized = plan_scene(optimized_scene, o);

  write_plan(fixed, model, out_path(o, "fixed_timing.csv"),
             out_path(o, "fixed_timing_report.json"));
  write_plan(optimized, model, out_path(o, "optimized.csv"),
             out_path(o, "optimized_report.json"));
  write_text_file(out_path(o, "optimized_scene.json"), serialize_scene(optimized_scene));

  nlohmann::json trace = nlohmann::json::array();
  for (const TimeOptIteration& it : opt.trace.iterations) {
    trace.push_back({{"times", it.times},
                     {"f", it.f},
                     {"score", it.score},
                     {"n_stages", it.n_stages},
                     {"step_length", it.step_length},
                     {"gradient_norm", it.gradient_norm}});
  }
  nlohmann::json times = nlohmann::json::array();
  for (const Keyframe& kf : opt.keyframes) times.push_back(kf.time);
  write_text_file(out_path(o, "time_opt_trace.json"),
                  nlohmann::json{{"mode", to_string(config.mode)},
                                 {"w", config.step_weight()},
                                 {"no_progress", opt.no_progress},
                                 {"optimized_times", times},
                                 {"iterations", trace}}
                          .dump(2) +
                      "\n");

  const Comparison cmp =
      compare(fixed.trajectory, fixed.keyframes, optimized.trajectory, optimized.keyframes);
  write_text_file(out_path(o, "comparison.json"),
                  comparison_json(cmp, "fixed_timing", "time_optimized").dump(2) + "\n");

  std::cout << "optimized times:";
  for (const Keyframe& kf : opt.keyframes) std::cout << ' ' << kf.time;
  std::cout << (opt.no_progress ? "  (no progress)" : "") << "\n";
  print_comparison(std::cout, cmp, "fixed_timing", "time_optimized");
  std::cout << "wrote outputs to " << o.out_dir << "\n";
  return kExitOk;
}

int cmd_metrics(const std::string& traj_path, const std::string& scene_path, bool as_json,
                const Overrides& o, bool write_file) {
  const Trajectory traj = read_trajectory(traj_path);
  MetricReport m;
  if (!scene_path.empty()) {
    const SceneSpec scene = load_with_overrides(scene_path, o);
    m = metric_report(traj, unwrap_yaws(scene.keyframes));
  } else {
    m.normalized_jerk = normalized_jerk(traj);
    m.normalized_angular_jerk = normalized_angular_jerk(traj);
  }
  if (as_json) {
    std::cout << metrics_to_json(m);
  } else {
    print_metrics(std::cout, m);
  }
  if (write_file) write_text_file(out_path(o, "metrics.json"), metrics_to_json(m));
  return kExitOk;
}

int cmd_compare(const std::string& a, const std::string& b, const std::string& scene_path,
                const std::string& second_scene_path, const Overrides& o, bool write_file) {
  const Trajectory ta = read_trajectory(a);
  const Trajectory tb = read_trajectory(b);
  const SceneSpec scene = load_with_overrides(scene_path, o);
  KeyframeList kb = scene.keyframes;
  if (!second_scene_path.empty()) kb = load_with_overrides(second_scene_path, o).keyframes;
  const Comparison cmp = compare(ta, unwrap_yaws(scene.keyframes), tb, unwrap_yaws(kb));
  print_comparison(std::cout, cmp, "first", "second");
  if (write_file) {
    write_text_file(out_path(o, "comparison.json"),
                    comparison_json(cmp, "first", "second").dump(2) + "\n");
  }
  return kExitOk;
}

int cmd_baseline(const std::string& scene_path, const Overrides& o) {
  const SceneSpec scene = load_with_overrides(scene_path, o);
  if (scene.lookat_keyframes.empty()) {
    throw FieldError("lookat_keyframes", "baseline-lookat needs at least one look-at keyframe");
  }
  const PlanResult plan = plan_scene(scene, o);
  const Trajectory& t = plan.trajectory;
  const auto baseline =
      lookat_baseline_orientation(t.states.leftCols<3>(), scene.lookat_keyframes, t.grid);

  std::string csv = "index,t,baseline_yaw,baseline_pitch,planned_yaw,planned_pitch\n";
  std::vector<double> baseline_pitch;
  char buf[200];
  for (int i = 0; i <= t.n_stages(); ++i) {
    std::snprintf(buf, sizeof(buf), "%d,%.9g,%.9g,%.9g,%.9g,%.9g\n", i, t.grid.time(i),
                  baseline[i].yaw, baseline[i].pitch, t.camera_yaw(i), t.camera_pitch(i));
    csv += buf;
    baseline_pitch.push_back(baseline[i].pitch);
  }
  const std::string path = out_path(o, "lookat_baseline.csv");
  write_text_file(path, csv);

  std::vector<double> lookat_times;
  for (const auto& k : scene.lookat_keyframes) lookat_times.push_back(k.time);
  const auto lookat_stages = keyframe_index_map(lookat_times, scene.dt);
  const double base_exc = max_interkeyframe_pitch_excursion(baseline_pitch, lookat_stages);
  const double plan_exc =
      max_interkeyframe_pitch_excursion(camera_pitch_series(t), plan.stages);
  std::snprintf(buf, sizeof(buf),
                "pitch excursion: look-at baseline %.3f deg, reference-angle plan %.3f deg\n",
                base_exc * kRadToDeg, plan_exc * kRadToDeg);
  std::cout << buf << "wrote " << path << "\n";
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"Keyframe-based quadrotor camera trajectory planner"};
  app.require_subcommand(1);
  Overrides o;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--dt", o.dt, "Grid step in seconds (overrides the scene)");
    sub->add_option("--weights", o.weights,
                    "Weight overrides, e.g. keyframe=1e4,position_derivative=0:0:1");
    sub->add_option("--out-dir", o.out_dir, "Directory for output files");
  };

  std::string scene_path;
  std::string traj_a;
  std::string traj_b;
  std::string second_scene;
  bool as_json = false;

  CLI::App* plan = app.add_subcommand("plan", "Plan a trajectory for a scene");
  plan->add_option("scene", scene_path, "Scene file")->required();
  add_common(plan);
  plan->add_option("--qp-max-iter", o.qp_max_iter, "Interior-point iteration cap");

  CLI::App* topt = app.add_subcommand("time-opt", "Optimize keyframe times and compare");
  topt->add_option("scene", scene_path, "Scene file")->required();
  add_common(topt);
  // Drop the -h short form so --h can name the finite-difference step.
  topt->set_help_flag("--help", "Print this help message and exit");
  topt->add_option("--qp-max-iter", o.qp_max_iter, "Interior-point iteration cap");
  topt->add_option("--mode", o.mode, "free-end or fixed-end");
  topt->add_option("--w", o.w, "Cost per grid step (free-end)");
  topt->add_option("--h", o.h, "Finite-difference step in seconds");
  topt->add_option("--max-iters", o.max_iters, "Gradient-descent iteration cap");

  CLI::App* metrics = app.add_subcommand("metrics", "Smoothness and fit metrics of a trajectory");
  metrics->add_option("trajectory", traj_a, "Trajectory file")->required();
  metrics->add_option("--scene", scene_path, "Scene with the keyframes to fit against");
  metrics->add_flag("--json", as_json, "Print machine-readable JSON");
  add_common(metrics);

  CLI::App* cmp = app.add_subcommand("compare", "Compare two trajectory files");
  cmp->add_option("first", traj_a, "First trajectory file")->required();
  cmp->add_option("second", traj_b, "Second trajectory file")->required();
  cmp->add_option("--scene", scene_path, "Scene with the keyframes")->required();
  cmp->add_option("--second-scene", second_scene,
                  "Scene with the keyframe timing of the second trajectory");
  add_common(cmp);

  CLI::App* base = app.add_subcommand("baseline-lookat",
                                      "Look-at baseline orientation for the planned positions");
  base->add_option("scene", scene_path, "Scene file with lookat_keyframes")->required();
  add_common(base);
  base->add_option("--qp-max-iter", o.qp_max_iter, "Interior-point iteration cap");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (plan->parsed()) return cmd_plan(scene_path, o);
    if (topt->parsed()) return cmd_time_opt(scene_path, o);
    if (metrics->parsed()) {
      return cmd_metrics(traj_a, scene_path, as_json, o, metrics->count("--out-dir") > 0);
    }
    if (cmp->parsed()) {
      return cmd_compare(traj_a, traj_b, scene_path, second_scene, o,
                         cmp->count("--out-dir") > 0);
    }
    if (base->parsed()) return cmd_baseline(scene_path, o);
  } catch (const SolverError& e) {
    std::cerr << "solver failure: " << e.what() << "\n";
    return kExitSolver;
  } catch (const ValidationError& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return kExitValidation;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  }
  return kExitValidation;
}

}  // namespace camtraj
