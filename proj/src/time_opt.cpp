#include "camtraj/time_opt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "camtraj/errors.hpp"

namespace camtraj {
namespace {

constexpr double kTimeTol = 1e-9;

std::vector<double> times_of(const KeyframeList& keyframes) {
  std::vector<double> t;
  t.reserve(keyframes.size());
  for (const auto& kf : keyframes) t.push_back(kf.time);
  return t;
}

std::vector<int> free_indices(std::size_t m, EndMode mode) {
  std::vector<int> idx;
  const std::size_t last = mode == EndMode::kFixedEnd ? m - 1 : m;
  for (std::size_t i = 1; i < last; ++i) idx.push_back(static_cast<int>(i));
  return idx;
}

int gap_steps(double min_gap, double dt) {
  return std::max(1, static_cast<int>(std::ceil(min_gap / dt - 1e-9)));
}

long grid_index(double t, double dt) {
  return static_cast<long>(std::floor(t / dt + 0.5 + 1e-9));
}

}  // namespace

const char* to_string(EndMode mode) {
  return mode == EndMode::kFreeEnd ? "free_end" : "fixed_end";
}

void TimeOptConfig::validate(double dt) const {
  if (mode == EndMode::kFreeEnd && !(w > 0.0)) {
    throw ParameterError("free_end time optimization requires w > 0");
  }
  if (!(w >= 0.0) || !std::isfinite(w)) throw ParameterError("w must be >= 0");
  if (!(h >= dt - kTimeTol)) {
    throw ParameterError("finite-difference step h must be at least dt");
  }
  if (!(min_gap >= dt - kTimeTol)) {
    throw ParameterError("min_gap must be at least dt");
  }
  if (max_iters < 0) throw ParameterError("max_iters must be >= 0");
  if (!(rel_tol >= 0.0)) throw ParameterError("rel_tol must be >= 0");
  if (!(max_step > 0.0)) throw ParameterError("max_step must be > 0");
}

PlanResult TimingContext::plan(std::span<const double> times) const {
  if (times.size() != keyframes.size()) {
    throw ShapeError("expected " + std::to_string(keyframes.size()) +
                     " keyframe times, got " + std::to_string(times.size()));
  }
  KeyframeList kfs = keyframes;
  for (std::size_t j = 0; j < kfs.size(); ++j) kfs[j].time = times[j];
  PlanOptions options;
  options.initial_state = initial_state;
  options.solver = solver;
  return plan_trajectory(kfs, quad, gimbal, weights, dt, options);
}

TimeObjective objective_f(std::span<const double> times,
                          const TimingContext& context, double w) {
  const PlanResult plan = context.plan(times);
  TimeObjective out;
  out.f = plan.report.objective;
  out.n_stages = plan.trajectory.n_stages();
  out.score = out.f + out.n_stages * w;
  return out;
}

TimeGradient numerical_gradient(std::span<const double> times,
                                const TimingContext& context,
                                const TimeOptConfig& config) {
  config.validate(context.dt);
  const double w = config.step_weight();
  const double h = config.h;
  const std::size_t m = times.size();

  TimeGradient g;
  g.free_indices = free_indices(m, config.mode);
  g.values = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(g.free_indices.size()));
  g.base = objective_f(times, context, w);

  std::vector<double> probe(times.begin(), times.end());
  for (std::size_t k = 0; k < g.free_indices.size(); ++k) {
    const std::size_t i = static_cast<std::size_t>(g.free_indices[k]);
    const bool forward_ok =
        i + 1 >= m || times[i] + h <= times[i + 1] - config.min_gap + kTimeTol;
    const bool backward_ok =
        times[i] - h >= times[i - 1] + config.min_gap - kTimeTol;
    double sign = 0.0;
    if (forward_ok) {
      sign = 1.0;
    } else if (backward_ok) {
      sign = -1.0;
    } else {
      continue;
    }
    probe[i] = times[i] + sign * h;
    const double perturbed = objective_f(probe, context, w).score;
    probe[i] = times[i];
    g.values[static_cast<Eigen::Index>(k)] = sign * (perturbed - g.base.score) / h;
  }
  return g;
}

std::vector<double> project_times(std::span<const double> candidate,
                                  std::span<const double> current,
                                  const TimeOptConfig& config, double dt) {
  const std::size_t m = candidate.size();
  const long gap = gap_steps(config.min_gap, dt);
  std::vector<long> idx(m);
  idx[0] = 0;
  const long last_fixed = grid_index(current[m - 1], dt);
  for (std::size_t i = 1; i < m; ++i) {
    if (config.mode == EndMode::kFixedEnd && i == m - 1) {
      idx[i] = last_fixed;
      continue;
    }
    long v = grid_index(candidate[i], dt);
    if (i + 1 < m) v = std::min(v, grid_index(candidate[i + 1], dt) - gap);
    if (config.mode == EndMode::kFixedEnd) {
      v = std::min(v, last_fixed - static_cast<long>(m - 1 - i) * gap);
    }
    v = std::max(v, idx[i - 1] + gap);
    idx[i] = v;
  }
  std::vector<double> out(m);
  for (std::size_t i = 0; i < m; ++i) out[i] = static_cast<double>(idx[i]) * dt;
  return out;
}

TimeOptResult optimize_times(const KeyframeList& keyframes,
                             const TimeOptConfig& config,
                             const TimingContext& context) {
  config.validate(context.dt);
  validate_keyframes(keyframes, context.gimbal);
  const double w = config.step_weight();

  TimingContext ctx = context;
  ctx.keyframes = keyframes;

  // Start on the grid so every reported time is a grid time.
  std::vector<double> t = times_of(keyframes);
  for (double& ti : t) ti = static_cast<double>(grid_index(ti, ctx.dt)) * ctx.dt;

  TimeOptResult result;
  TimeObjective current = objective_f(t, ctx, w);
  result.trace.iterations.push_back(
      {t, current.f, current.score, current.n_stages, 0.0, 0.0});

  for (int iter = 1; iter <= config.max_iters; ++iter) {
    const TimeGradient grad = numerical_gradient(t, ctx, config);
    const double gnorm = grad.values.norm();
    if (grad.values.size() == 0 || gnorm < 1e-6) {
      if (iter == 1) result.no_progress = true;
      break;
    }

    double alpha = config.max_step / grad.values.lpNorm<Eigen::Infinity>();
    bool accepted = false;
    std::vector<double> trial;
    TimeObjective trial_obj;
    for (int halving = 0; halving <= 20; ++halving, alpha *= 0.5) {
      std::vector<double> raw = t;
      for (std::size_t k = 0; k < grad.free_indices.size(); ++k) {
        raw[grad.free_indices[k]] -= alpha * grad.values[static_cast<Eigen::Index>(k)];
      }
      trial = project_times(raw, t, config, ctx.dt);
      if (trial == t) break;  // smaller steps round back to the same grid point
      trial_obj = objective_f(trial, ctx, w);
      if (trial_obj.score < current.score) {
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      if (iter == 1) result.no_progress = true;
      break;
    }

    const double improvement = (current.score - trial_obj.score) /
                               std::max(std::abs(current.score), 1e-12);
    t = trial;
    current = trial_obj;
    result.trace.iterations.push_back(
        {t, current.f, current.score, current.n_stages, alpha, gnorm});
    if (improvement < config.rel_tol) break;
  }

  result.keyframes = keyframes;
  for (std::size_t j = 0; j < t.size(); ++j) result.keyframes[j].time = t[j];
  return result;
}

}  // namespace camtraj
