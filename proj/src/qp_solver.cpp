#include "camtraj/qp_solver.hpp"

#include <Eigen/SparseLU>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

#include "camtraj/errors.hpp"

namespace camtraj {
namespace {

using Eigen::VectorXd;

double inf_norm(const VectorXd& v) {
  return v.size() == 0 ? 0.0 : v.lpNorm<Eigen::Infinity>();
}

// Largest step in [0, 1] keeping v + alpha * dv >= 0.
double max_step(const VectorXd& v, const VectorXd& dv) {
  double alpha = 1.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (dv[i] < 0.0) alpha = std::min(alpha, -v[i] / dv[i]);
  }
  return alpha;
}

// Reduced KKT system
//   [ H + G'WG   E' ] [dx]   [rx]
//   [ E          0  ] [dy] = [ry]
// with a pattern that stays fixed across iterations so the symbolic analysis
// is done once.
class KktSystem {
 public:
  KktSystem(const QpProblem& p, const SparseMatrix& Gt)
      : p_(p), Gt_(Gt), n_(p.num_variables()), me_(p.b_eq.size()) {}

  bool factor(const VectorXd& w) {
    const SparseMatrix GtWG = Gt_ * w.asDiagonal() * p_.A_ineq;
    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(p_.H.nonZeros() + GtWG.nonZeros() +
                     2 * p_.A_eq.nonZeros() + n_ + me_);
    for (Eigen::Index i = 0; i < n_ + me_; ++i) triplets.emplace_back(i, i, 0.0);
    for (int k = 0; k < p_.H.outerSize(); ++k) {
      for (SparseMatrix::InnerIterator it(p_.H, k); it; ++it) {
        triplets.emplace_back(it.row(), it.col(), it.value());
      }
    }
    for (int k = 0; k < GtWG.outerSize(); ++k) {
      for (SparseMatrix::InnerIterator it(GtWG, k); it; ++it) {
        triplets.emplace_back(it.row(), it.col(), it.value());
      }
    }
    for (int k = 0; k < p_.A_eq.outerSize(); ++k) {
      for (SparseMatrix::InnerIterator it(p_.A_eq, k); it; ++it) {
        triplets.emplace_back(n_ + it.row(), it.col(), it.value());
        triplets.emplace_back(it.col(), n_ + it.row(), it.value());
      }
    }
    K_.resize(n_ + me_, n_ + me_);
    K_.setFromTriplets(triplets.begin(), triplets.end());
    K_.makeCompressed();
    if (!analyzed_) {
      lu_.analyzePattern(K_);
      analyzed_ = true;
    }
    lu_.factorize(K_);
    return lu_.info() == Eigen::Success;
  }

  // Solves with two rounds of iterative refinement.
  VectorXd solve(const VectorXd& rhs) {
    VectorXd sol = lu_.solve(rhs);
    for (int round = 0; round < 2; ++round) {
      const VectorXd r = rhs - K_ * sol;
      sol += lu_.solve(r);
    }
    return sol;
  }

 private:
  const QpProblem& p_;
  const SparseMatrix& Gt_;
  Eigen::Index n_;
  Eigen::Index me_;
  SparseMatrix K_;
  Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> lu_;
  bool analyzed_ = false;
};

}  // namespace

double QpProblem::objective(const VectorXd& x) const {
  return 0.5 * x.dot(H * x) + f.dot(x) + constant;
}

void QpProblem::check_shapes() const {
  const Eigen::Index n = f.size();
  auto fail = [](const std::string& what) { throw ShapeError(what); };
  if (H.rows() != n || H.cols() != n) fail("H must be n x n");
  if (A_eq.cols() != n || A_eq.rows() != b_eq.size()) {
    fail("A_eq/b_eq dimensions are inconsistent");
  }
  if (A_ineq.cols() != n || A_ineq.rows() != b_ineq.size()) {
    fail("A_ineq/b_ineq dimensions are inconsistent");
  }
}

const char* to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::kOptimal:
      return "optimal";
    case SolveStatus::kMaxIter:
      return "max_iter";
    case SolveStatus::kInfeasible:
      return "infeasible";
  }
  return "unknown";
}

KktResiduals kkt_residuals(const QpProblem& p, const VectorXd& x,
                           const VectorXd& y, const VectorXd& z) {
  KktResiduals r;
  r.primal_eq = inf_norm(p.A_eq * x - p.b_eq);
  const VectorXd slack = p.b_ineq - p.A_ineq * x;
  r.primal_ineq = slack.size() ? std::max(0.0, -slack.minCoeff()) : 0.0;
  VectorXd grad = p.H * x + p.f;
  if (y.size()) grad += p.A_eq.transpose() * y;
  if (z.size()) grad += p.A_ineq.transpose() * z;
  r.stationarity = inf_norm(grad);
  r.complementarity =
      z.size() ? inf_norm(z.cwiseProduct(slack)) : 0.0;
  return r;
}

QpSolution solve_qp(const QpProblem& p, const QpSettings& settings) {
  const auto start = std::chrono::steady_clock::now();
  p.check_shapes();

  const Eigen::Index n = p.num_variables();
  const Eigen::Index me = p.b_eq.size();
  const Eigen::Index mi = p.b_ineq.size();
  const SparseMatrix Et = p.A_eq.transpose();
  const SparseMatrix Gt = p.A_ineq.transpose();

  QpSolution out;
  SolveReport& report = out.report;
  KktSystem kkt(p, Gt);

  auto finish = [&](SolveStatus status) {
    report.status = status;
    report.objective = p.objective(out.x);
    report.kkt_residuals = kkt_residuals(p, out.x, out.y_eq, out.z_ineq);
    report.wall_time = std::chrono::duration<double>(
                           std::chrono::steady_clock::now() - start)
                           .count();
    return out;
  };

  // Starting point: equality-constrained minimizer with unit barrier weights.
  VectorXd x, y;
  {
    if (!kkt.factor(VectorXd::Ones(mi))) {
      out.x = VectorXd::Zero(n);
      out.y_eq = VectorXd::Zero(me);
      out.z_ineq = VectorXd::Zero(mi);
      report.diagnostic = "KKT matrix is singular (rank-deficient constraints)";
      return finish(SolveStatus::kInfeasible);
    }
    VectorXd rhs(n + me);
    rhs.head(n) = -p.f + Gt * p.b_ineq;
    rhs.tail(me) = p.b_eq;
    const VectorXd sol = kkt.solve(rhs);
    x = sol.head(n);
    y = sol.tail(me);
  }

  if (mi == 0) {
    out.x = x;
    out.y_eq = y;
    out.z_ineq = VectorXd();
    report.iterations = 1;
    const KktResiduals r = kkt_residuals(p, x, y, out.z_ineq);
    const bool ok = r.primal_eq <= settings.eps_eq;
    if (!ok) report.diagnostic = "equality constraints are inconsistent";
    return finish(ok ? SolveStatus::kOptimal : SolveStatus::kInfeasible);
  }

  VectorXd s = (p.b_ineq - p.A_ineq * x).cwiseMax(1.0);
  VectorXd z = VectorXd::Ones(mi);

  int stalled = 0;
  for (int iter = 1; iter <= settings.max_iter; ++iter) {
    report.iterations = iter;

    const VectorXd Hx = p.H * x;
    const VectorXd Ety = Et * y;
    const VectorXd Gtz = Gt * z;
    const VectorXd r_d = Hx + p.f + Ety + Gtz;
    const VectorXd r_e = p.A_eq * x - p.b_eq;
    const VectorXd Gx = p.A_ineq * x;
    const VectorXd r_i = Gx + s - p.b_ineq;
    const double mu = s.dot(z) / static_cast<double>(mi);

    const double obj = 0.5 * x.dot(Hx) + p.f.dot(x) + p.constant;
    const double dual_scale = std::max(
        {1.0, inf_norm(Hx), inf_norm(p.f), inf_norm(Ety), inf_norm(Gtz)});
    const double comp_scale = std::max(1.0, std::abs(obj));
    const double ineq_violation =
        std::max(0.0, (Gx - p.b_ineq).maxCoeff());
    const double comp =
        inf_norm(z.cwiseProduct(p.b_ineq - Gx));

    if (inf_norm(r_e) <= settings.eps_eq &&
        ineq_violation <= settings.eps_ineq &&
        inf_norm(r_d) <= settings.eps_dual * dual_scale &&
        comp <= settings.eps_comp * comp_scale &&
        // Drive the barrier well below the reporting tolerance so flat
        // directions of the cost are not biased toward the analytic center.
        mu <= 1e-9 * settings.eps_comp * comp_scale / static_cast<double>(mi)) {
      out.x = x;
      out.y_eq = y;
      out.z_ineq = z;
      return finish(SolveStatus::kOptimal);
    }

    // Farkas certificate: E'y + G'z = 0, z >= 0, b'y + h'z < 0.
    const double dual_norm = std::max(inf_norm(y), inf_norm(z));
    if (dual_norm > 1e8) {
      const VectorXd yn = y / dual_norm;
      const VectorXd zn = z / dual_norm;
      const double ray = inf_norm(Et * yn + Gt * zn);
      const double gap = p.b_eq.dot(yn) + p.b_ineq.dot(zn);
      if (ray <= 1e-6 && gap < -1e-6) {
        out.x = x;
        out.y_eq = y;
        out.z_ineq = z;
        std::ostringstream msg;
        msg << "primal infeasible: certificate b'y + h'z = " << gap
            << ", max violation eq " << inf_norm(r_e) << ", ineq "
            << ineq_violation;
        report.diagnostic = msg.str();
        return finish(SolveStatus::kInfeasible);
      }
    }

    const VectorXd w = z.cwiseQuotient(s);
    if (!kkt.factor(w)) {
      report.diagnostic = "KKT factorization failed";
      out.x = x;
      out.y_eq = y;
      out.z_ineq = z;
      return finish(SolveStatus::kInfeasible);
    }

    // Given a complementarity target r_c, returns (dx, dy, ds, dz).
    auto newton = [&](const VectorXd& r_c, VectorXd& dx, VectorXd& dy,
                      VectorXd& ds, VectorXd& dz) {
      const VectorXd t = (z.cwiseProduct(r_i) - r_c).cwiseQuotient(s);
      VectorXd rhs(n + me);
      rhs.head(n) = -r_d - Gt * t;
      rhs.tail(me) = -r_e;
      const VectorXd sol = kkt.solve(rhs);
      dx = sol.head(n);
      dy = sol.tail(me);
      const VectorXd Gdx = p.A_ineq * dx;
      ds = -r_i - Gdx;
      dz = t + w.cwiseProduct(Gdx);
    };

    VectorXd dx, dy, ds, dz;
    // Predictor (affine scaling).
    const VectorXd sz = s.cwiseProduct(z);
    newton(sz, dx, dy, ds, dz);
    const double a_p = max_step(s, ds);
    const double a_d = max_step(z, dz);
    const double mu_aff =
        (s + a_p * ds).dot(z + a_d * dz) / static_cast<double>(mi);
    const double sigma = std::pow(std::clamp(mu_aff / mu, 0.0, 1.0), 3);

    // Corrector with centering.
    const VectorXd r_c = sz + ds.cwiseProduct(dz) -
                         VectorXd::Constant(mi, sigma * mu);
    newton(r_c, dx, dy, ds, dz);

    // One step length for primal and dual: H couples them in the
    // stationarity residual.
    const double tau = 0.995;
    const double alpha =
        std::min(1.0, tau * std::min(max_step(s, ds), max_step(z, dz)));
    x += alpha * dx;
    s += alpha * ds;
    y += alpha * dy;
    z += alpha * dz;

    stalled = alpha < 1e-10 ? stalled + 1 : 0;
    if (stalled >= 10) {
      out.x = x;
      out.y_eq = y;
      out.z_ineq = z;
      std::ostringstream msg;
      msg << "step length collapsed; max violation eq " << inf_norm(r_e)
          << ", ineq " << ineq_violation;
      report.diagnostic = msg.str();
      const bool primal_ok = inf_norm(r_e) <= settings.eps_eq &&
                             ineq_violation <= settings.eps_ineq;
      return finish(primal_ok ? SolveStatus::kMaxIter
                              : SolveStatus::kInfeasible);
    }
  }

  out.x = x;
  out.y_eq = y;
  out.z_ineq = z;
  report.diagnostic = "iteration cap reached";
  return finish(SolveStatus::kMaxIter);
}

}  // namespace camtraj
