#include "dpsb/baselines.hpp"

#include <cmath>
#include <limits>

namespace dpsb::base {

TuningGrid TuningGrid::loglinear(double a, double b, int n) {
  if (n < 2) throw std::invalid_argument("TuningGrid: need at least 2 points");
  if (!(a < b)) throw std::invalid_argument("TuningGrid: need a < b");
  TuningGrid grid;
  grid.points.resize(n);
  for (int i = 0; i < n; ++i) {
    grid.points[i] = std::pow(10.0, a + (b - a) * static_cast<double>(i) / (n - 1));
  }
  return grid;
}

namespace {

// D^T D is tridiagonal with diagonal (2, ..., 2, 1) and -1 off the diagonal.
Eigen::MatrixXd difference_normal_matrix(int d) {
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(d, d);
  for (int k = 0; k < d; ++k) {
    g(k, k) = (k + 1 < d) ? 2.0 : 1.0;
    if (k + 1 < d) {
      g(k, k + 1) = -1.0;
      g(k + 1, k) = -1.0;
    }
  }
  return g;
}

Eigen::VectorXd apply_difference_adjoint(const Eigen::VectorXd& p) {
  // D^T p for the bidiagonal difference matrix.
  const Eigen::Index d = p.size();
  Eigen::VectorXd out(d);
  for (Eigen::Index k = 0; k < d; ++k) {
    out[k] = p[k] - (k + 1 < d ? p[k + 1] : 0.0);
  }
  return out;
}

}  // namespace

levy::Signal solve_l2(const Eigen::VectorXd& y, const fwd::ForwardModel& model, double lambda) {
  if (lambda < 0.0) throw std::invalid_argument("solve_l2: lambda must be >= 0");
  if (y.size() != model.m) throw std::invalid_argument("solve_l2: measurement length mismatch");
  const Eigen::MatrixXd a = fwd::dense_matrix(model);
  Eigen::MatrixXd normal_matrix = a.transpose() * a;
  normal_matrix.noalias() += 2.0 * lambda * difference_normal_matrix(model.d);
  const Eigen::LDLT<Eigen::MatrixXd> ldlt(normal_matrix);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive() ||
      ldlt.vectorD().minCoeff() <= 1e-14 * normal_matrix.diagonal().maxCoeff()) {
    throw std::runtime_error("solve_l2: singular normal equations");
  }
  return ldlt.solve(a.transpose() * y);
}

levy::Signal solve_l1(const Eigen::VectorXd& y, const fwd::ForwardModel& model, double lambda,
                      double tol, int max_iters) {
  if (lambda < 0.0) throw std::invalid_argument("solve_l1: lambda must be >= 0");
  if (!(tol > 0.0)) throw std::invalid_argument("solve_l1: tol must be > 0");
  if (y.size() != model.m) throw std::invalid_argument("solve_l1: measurement length mismatch");
  const int d = model.d;

  // ||D||_2 < 2 for the bidiagonal difference matrix.
  const double op_norm = 2.0;
  const double tau = 0.95 / op_norm;
  const double sigma_step = 0.95 / op_norm;

  const Eigen::MatrixXd a = fwd::dense_matrix(model);
  Eigen::MatrixXd prox_matrix = tau * (a.transpose() * a);
  prox_matrix.diagonal().array() += 1.0;
  const Eigen::LLT<Eigen::MatrixXd> prox_llt(prox_matrix);
  const Eigen::VectorXd aty = a.transpose() * y;

  Eigen::VectorXd x = Eigen::VectorXd::Zero(d);
  Eigen::VectorXd p = Eigen::VectorXd::Zero(d);
  Eigen::VectorXd x_bar = x;
  const double scale = std::max(0.5 * y.squaredNorm(), 1e-30);
  const double threshold = tol * scale;

  double residual = std::numeric_limits<double>::infinity();
  for (int it = 0; it < max_iters; ++it) {
    const Eigen::VectorXd p_old = p;
    const Eigen::VectorXd x_old = x;

    p += sigma_step * levy::apply_difference(x_bar);
    p = p.cwiseMax(-lambda).cwiseMin(lambda);
    x = prox_llt.solve(x - tau * apply_difference_adjoint(p) + tau * aty);
    x_bar = 2.0 * x - x_old;

    if (it % 25 == 24 || it + 1 == max_iters) {
      const Eigen::VectorXd dx = x_old - x;
      const Eigen::VectorXd dp = p_old - p;
      const double primal_res = (dx / tau - apply_difference_adjoint(dp)).norm();
      const double dual_res = (dp / sigma_step - levy::apply_difference(dx)).norm();
      residual = primal_res + dual_res;
      if (residual <= threshold) return x;
    }
  }
  throw ConvergenceError("solve_l1: iteration cap reached", residual);
}

double tune_lambda(const PointEstimator& estimator, const std::vector<ValidationItem>& validation,
                   const TuningGrid& grid) {
  if (validation.empty()) throw std::invalid_argument("tune_lambda: empty validation set");
  if (grid.points.empty()) throw std::invalid_argument("tune_lambda: empty grid");
  double best_lambda = grid.points.front();
  double best_mse = std::numeric_limits<double>::infinity();
  for (const double lambda : grid.points) {
    double mse = 0.0;
    for (const auto& item : validation) {
      const levy::Signal estimate = estimator(item.y, lambda);
      mse += (estimate - item.truth).squaredNorm() / static_cast<double>(item.truth.size());
    }
    mse /= static_cast<double>(validation.size());
    if (mse < best_mse) {
      best_mse = mse;
      best_lambda = lambda;
    }
  }
  return best_lambda;
}

std::vector<dps::AlgorithmParams> cdps_grid() {
  std::vector<dps::AlgorithmParams> out;
  for (const double zeta : TuningGrid::loglinear(-3.0, 1.0, 40).points) {
    out.push_back(dps::CdpsParams{zeta});
  }
  return out;
}

std::vector<dps::AlgorithmParams> diffpir_grid() {
  std::vector<dps::AlgorithmParams> out;
  const auto rho = TuningGrid::loglinear(-4.0, 1.0, 20).points;
  for (const double zeta : {0.3, 0.7}) {
    for (const double lambda : rho) out.push_back(dps::DiffpirParams{lambda, zeta});
  }
  return out;
}

std::vector<dps::AlgorithmParams> dpnp_grid() {
  std::vector<dps::AlgorithmParams> out;
  for (const double eta : TuningGrid::loglinear(-1.0, 4.0, 40).points) {
    dps::DpnpParams p;
    p.eta_initial = eta;
    out.push_back(p);
  }
  return out;
}

DpsTuningResult tune_dps(const std::vector<dps::AlgorithmParams>& candidates,
                         const diff::DiffusionSchedule& schedule, int denoiser_samples,
                         const std::vector<ValidationItem>& validation,
                         const fwd::ForwardModel& model, const diff::Denoiser& denoiser,
                         std::uint64_t seed, int n_samples) {
  if (candidates.empty()) throw std::invalid_argument("tune_dps: empty grid");
  if (validation.empty()) throw std::invalid_argument("tune_dps: empty validation set");

  DpsTuningResult result;
  result.sse_curve.assign(candidates.size(), 0.0);
  double best = std::numeric_limits<double>::infinity();
  for (size_t c = 0; c < candidates.size(); ++c) {
    dps::DpsConfig config{candidates[c], schedule, denoiser_samples, n_samples};
    double sse = 0.0;
    for (size_t j = 0; j < validation.size(); ++j) {
      // Seeds depend on the item, not the grid point, so every candidate sees
      // the same random streams.
      const std::uint64_t item_seed = derive_seed(seed, "tune-item", {j});
      try {
        const auto run = dps::run_dps(config, validation[j].y, model, denoiser, item_seed);
        const levy::Signal mmse = run.draws.rowwise().mean();
        sse += (mmse - validation[j].truth).squaredNorm();
      } catch (const std::exception&) {
        // Divergent grid extremes score as unusable rather than aborting the
        // whole search.
        sse = std::numeric_limits<double>::infinity();
        break;
      }
    }
    result.sse_curve[c] = sse;
    if (sse < best) {
      best = sse;
      result.best_index = static_cast<int>(c);
    }
  }
  result.best = candidates[result.best_index];
  return result;
}

}  // namespace dpsb::base
