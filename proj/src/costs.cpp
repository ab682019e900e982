#include <cmath>
#include <numbers>
#include <string>

#include "camtraj/errors.hpp"
#include "camtraj/planner.hpp"

namespace camtraj {
namespace {

// Coefficients of the q-th backward difference, newest value first.
std::vector<double> difference_stencil(int q) {
  std::vector<double> c(q + 1);
  double binom = 1.0;
  for (int k = 0; k <= q; ++k) {
    c[k] = (k % 2 == 0 ? 1.0 : -1.0) * binom;
    binom = binom * (q - k) / (k + 1);
  }
  return c;
}

std::vector<double> keyframe_times(const KeyframeList& keyframes) {
  std::vector<double> t;
  t.reserve(keyframes.size());
  for (const auto& kf : keyframes) t.push_back(kf.time);
  return t;
}

void check_stage(int stage, const Grid& grid, std::size_t j) {
  if (stage < 0 || stage > grid.n_stages) {
    throw IndexError("keyframe " + std::to_string(j) + " maps to stage " +
                     std::to_string(stage) + " outside grid [0, " +
                     std::to_string(grid.n_stages) + "]");
  }
}

}  // namespace

QuadraticCost::QuadraticCost(int num_variables)
    : linear_(Eigen::VectorXd::Zero(num_variables)) {}

void QuadraticCost::add_square(std::initializer_list<Term> terms, double target,
                               double weight) {
  add_square(std::vector<Term>(terms), target, weight);
}

void QuadraticCost::add_square(const std::vector<Term>& terms, double target,
                               double weight) {
  if (weight == 0.0) return;
  residual_terms_.insert(residual_terms_.end(), terms.begin(), terms.end());
  residuals_.push_back({residual_terms_.size(), target, weight});
  for (const Term& a : terms) {
    for (const Term& b : terms) {
      triplets_.emplace_back(a.index, b.index, 2.0 * weight * a.coeff * b.coeff);
    }
    linear_[a.index] -= 2.0 * weight * target * a.coeff;
  }
  constant_ += weight * target * target;
}

void QuadraticCost::add(const QuadraticCost& other) {
  triplets_.insert(triplets_.end(), other.triplets_.begin(),
                   other.triplets_.end());
  linear_ += other.linear_;
  constant_ += other.constant_;
  const std::size_t offset = residual_terms_.size();
  residual_terms_.insert(residual_terms_.end(), other.residual_terms_.begin(),
                         other.residual_terms_.end());
  for (Residual r : other.residuals_) {
    r.end += offset;
    residuals_.push_back(r);
  }
}

SparseMatrix QuadraticCost::hessian() const {
  const int n = num_variables();
  SparseMatrix H(n, n);
  H.setFromTriplets(triplets_.begin(), triplets_.end());
  H.makeCompressed();
  return H;
}

double QuadraticCost::evaluate(const Eigen::VectorXd& x) const {
  double total = 0.0;
  std::size_t begin = 0;
  for (const Residual& r : residuals_) {
    double v = -r.target;
    for (std::size_t t = begin; t < r.end; ++t) {
      v += residual_terms_[t].coeff * x[residual_terms_[t].index];
    }
    total += r.weight * v * v;
    begin = r.end;
  }
  return total;
}

double QuadraticCost::evaluate_quadratic_form(const Eigen::VectorXd& x) const {
  return 0.5 * x.dot(hessian() * x) + linear_.dot(x) + constant_;
}

std::vector<int> keyframe_stages(const KeyframeList& keyframes, double dt) {
  const auto times = keyframe_times(keyframes);
  return keyframe_index_map(times, dt);
}

int Weights::max_order() const {
  int q = 0;
  for (int k = 0; k < 3; ++k) {
    if (position_derivative[k] > 0.0 || angle_derivative[k] > 0.0) q = k + 1;
  }
  return q;
}

void Weights::validate() const {
  auto nonneg = [](double v, const char* name) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw ParameterError(std::string(name) + " must be finite and >= 0");
    }
  };
  nonneg(keyframe, "keyframe weight");
  nonneg(orientation, "orientation weight");
  nonneg(gimbal_centering, "gimbal_centering weight");
  nonneg(input_regularization, "input_regularization weight");
  bool any_pos = false;
  bool any_ang = false;
  for (int k = 0; k < 3; ++k) {
    nonneg(position_derivative[k], "position_derivative weight");
    nonneg(angle_derivative[k], "angle_derivative weight");
    any_pos |= position_derivative[k] > 0.0;
    any_ang |= angle_derivative[k] > 0.0;
  }
  if (!any_pos) {
    throw ParameterError("at least one position_derivative weight must be > 0");
  }
  if (!any_ang) {
    throw ParameterError("at least one angle_derivative weight must be > 0");
  }
}

int horizon_stages(const KeyframeList& keyframes, double dt,
                   const Weights& weights) {
  const auto stages = keyframe_stages(keyframes, dt);
  return std::max({stages.back(), weights.max_order(), 1});
}

QuadraticCost build_keyframe_cost(const KeyframeList& keyframes,
                                  const Grid& grid, double weight) {
  const VariableLayout layout(grid.n_stages);
  QuadraticCost cost(layout.size());
  const auto stages = keyframe_stages(keyframes, grid.dt);
  for (std::size_t j = 0; j < keyframes.size(); ++j) {
    check_stage(stages[j], grid, j);
    for (int k = 0; k < 3; ++k) {
      cost.add_square({{layout.state(stages[j], state::kX + k), 1.0}},
                      keyframes[j].position[k], weight);
    }
  }
  return cost;
}

QuadraticCost build_derivative_cost(
    const Grid& grid, const std::array<double, 3>& position_weights,
    const std::array<double, 3>& angle_weights) {
  const VariableLayout layout(grid.n_stages);
  QuadraticCost cost(layout.size());
  const int n = grid.n_stages;

  static constexpr std::array<int, 3> kPositions{state::kX, state::kY,
                                                 state::kZ};
  static constexpr std::array<int, 3> kAngles{
      state::kBodyYaw, state::kGimbalYaw, state::kGimbalPitch};

  for (int q = 1; q <= 3; ++q) {
    const double wp = position_weights[q - 1];
    const double wa = angle_weights[q - 1];
    if (wp == 0.0 && wa == 0.0) continue;
    if (q > n) {
      throw InsufficientHorizonError(
          "derivative order " + std::to_string(q) + " needs at least " +
          std::to_string(q) + " stages, grid has " + std::to_string(n));
    }
    const std::vector<double> stencil = difference_stencil(q);
    const double scale = 1.0 / std::pow(grid.dt, q);

    auto penalize = [&](int component, double weight) {
      if (weight == 0.0) return;
      std::vector<QuadraticCost::Term> terms(q + 1);
      for (int i = q; i <= n; ++i) {
        for (int k = 0; k <= q; ++k) {
          terms[k] = {layout.state(i - k, component), stencil[k] * scale};
        }
        cost.add_square(terms, 0.0, weight);
      }
    };
    for (int c : kPositions) penalize(c, wp);
    for (int c : kAngles) penalize(c, wa);
  }
  return cost;
}

QuadraticCost build_orientation_cost(const KeyframeList& keyframes,
                                     const Grid& grid, double weight) {
  const VariableLayout layout(grid.n_stages);
  QuadraticCost cost(layout.size());
  const auto stages = keyframe_stages(keyframes, grid.dt);
  for (std::size_t j = 0; j < keyframes.size(); ++j) {
    check_stage(stages[j], grid, j);
    const int i = stages[j];
    cost.add_square({{layout.state(i, state::kBodyYaw), 1.0},
                     {layout.state(i, state::kGimbalYaw), 1.0}},
                    keyframes[j].yaw, weight);
    cost.add_square({{layout.state(i, state::kGimbalPitch), 1.0}},
                    keyframes[j].pitch, weight);
  }
  return cost;
}

QuadraticCost build_regularization_cost(const Grid& grid,
                                        const QuadrotorParams& quad,
                                        const Weights& weights) {
  const VariableLayout layout(grid.n_stages);
  QuadraticCost cost(layout.size());
  for (int i = 0; i <= grid.n_stages; ++i) {
    cost.add_square({{layout.state(i, state::kGimbalYaw), 1.0}}, 0.0,
                    weights.gimbal_centering);
  }
  const Input hover = hover_input(quad);
  for (int i = 0; i < grid.n_stages; ++i) {
    for (int k = 0; k < kInputDim; ++k) {
      cost.add_square({{layout.input(i, k), 1.0}}, hover[k],
                      weights.input_regularization);
    }
  }
  return cost;
}

KeyframeList unwrap_yaws(KeyframeList keyframes) {
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  for (std::size_t j = 1; j < keyframes.size(); ++j) {
    const double prev = keyframes[j - 1].yaw;
    double& yaw = keyframes[j].yaw;
    yaw -= kTwoPi * std::round((yaw - prev) / kTwoPi);
  }
  return keyframes;
}

}  // namespace camtraj
