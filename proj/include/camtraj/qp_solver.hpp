#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <string>

namespace camtraj {

using SparseMatrix = Eigen::SparseMatrix<double>;

/// minimize 1/2 x'Hx + f'x + constant
/// subject to A_eq x = b_eq, A_ineq x <= b_ineq.
struct QpProblem {
  SparseMatrix H;
  Eigen::VectorXd f;
  double constant = 0.0;
  SparseMatrix A_eq;
  Eigen::VectorXd b_eq;
  SparseMatrix A_ineq;
  Eigen::VectorXd b_ineq;

  Eigen::Index num_variables() const { return f.size(); }
  double objective(const Eigen::VectorXd& x) const;
  /// Throws ShapeError on inconsistent dimensions.
  void check_shapes() const;
};

enum class SolveStatus { kOptimal, kMaxIter, kInfeasible };

const char* to_string(SolveStatus status);

struct KktResiduals {
  double primal_eq = 0.0;      // max |A_eq x - b_eq|
  double primal_ineq = 0.0;    // max(0, A_ineq x - b_ineq)
  double stationarity = 0.0;   // max |Hx + f + A_eq'y + A_ineq'z|
  double complementarity = 0.0;  // max |z_i (b_ineq - A_ineq x)_i|
};

struct SolveReport {
  double objective = 0.0;
  KktResiduals kkt_residuals;
  int iterations = 0;
  double wall_time = 0.0;  // s
  SolveStatus status = SolveStatus::kMaxIter;
  std::string diagnostic;
};

struct QpSettings {
  double eps_eq = 1e-6;
  double eps_ineq = 1e-8;
  // Stationarity and complementarity are checked relative to the problem
  // scale, max(1, |Hx|, |f|, |A'y|, |A'z|) and max(1, |objective|).
  double eps_dual = 1e-6;
  double eps_comp = 1e-6;
  int max_iter = 2000;
};

struct QpSolution {
  Eigen::VectorXd x;
  Eigen::VectorXd y_eq;
  Eigen::VectorXd z_ineq;
  SolveReport report;
};

/// Primal-dual interior point (Mehrotra predictor-corrector) on the sparse
/// KKT system. Each iteration factors one sparse matrix whose pattern is
/// fixed, so banded problems cost O(n) per iteration.
QpSolution solve_qp(const QpProblem& problem, const QpSettings& settings = {});

/// Residuals of an arbitrary primal-dual point.
KktResiduals kkt_residuals(const QpProblem& problem, const Eigen::VectorXd& x,
                           const Eigen::VectorXd& y_eq,
                           const Eigen::VectorXd& z_ineq);

}  // namespace camtraj
