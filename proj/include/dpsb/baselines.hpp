#pragma once

#include <Eigen/Dense>
#include <functional>
#include <stdexcept>
#include <vector>

#include "dpsb/dps.hpp"
#include "dpsb/forward_models.hpp"
#include "dpsb/levy_prior.hpp"

namespace dpsb::base {

struct TuningGrid {
  std::vector<double> points;  // strictly increasing

  // points[i] = 10^(a + i (b-a)/(n-1)), i = 0..n-1.
  static TuningGrid loglinear(double a, double b, int n);
};

struct ConvergenceError : std::runtime_error {
  double gap;
  ConvergenceError(const std::string& what, double gap_arg)
      : std::runtime_error(what), gap(gap_arg) {}
};

// argmin_x 0.5 ||Ax - y||^2 + lambda ||Dx||^2, solved exactly from the normal
// equations (A^T A + 2 lambda D^T D) x = A^T y.
levy::Signal solve_l2(const Eigen::VectorXd& y, const fwd::ForwardModel& model, double lambda);

// argmin_x 0.5 ||Ax - y||^2 + lambda ||Dx||_1 by primal-dual splitting
// (Chambolle-Pock); stops when the combined fixed-point residual falls below
// tol times the objective at x = 0, errors past the iteration cap.
levy::Signal solve_l1(const Eigen::VectorXd& y, const fwd::ForwardModel& model, double lambda,
                      double tol = 1e-8, int max_iters = 50000);

struct ValidationItem {
  Eigen::VectorXd y;
  levy::Signal truth;
};

using PointEstimator = std::function<levy::Signal(const Eigen::VectorXd& y, double lambda)>;

// Grid point minimizing mean per-signal MSE over the validation set; ties
// break toward the smaller parameter.
double tune_lambda(const PointEstimator& estimator, const std::vector<ValidationItem>& validation,
                   const TuningGrid& grid);

// Stock parameter grids for the three DPS algorithms.
std::vector<dps::AlgorithmParams> cdps_grid();
std::vector<dps::AlgorithmParams> diffpir_grid();
std::vector<dps::AlgorithmParams> dpnp_grid();

struct DpsTuningResult {
  std::vector<double> sse_curve;  // summed squared error per grid point
  int best_index = 0;
  dps::AlgorithmParams best;
};

// Grid search over candidates; each point is scored with n_samples posterior
// draws per validation item and common random seeds across points.
DpsTuningResult tune_dps(const std::vector<dps::AlgorithmParams>& candidates,
                         const diff::DiffusionSchedule& schedule, int denoiser_samples,
                         const std::vector<ValidationItem>& validation,
                         const fwd::ForwardModel& model, const diff::Denoiser& denoiser,
                         std::uint64_t seed, int n_samples = 10);

}  // namespace dpsb::base
