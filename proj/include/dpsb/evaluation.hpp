#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "dpsb/forward_models.hpp"
#include "dpsb/levy_prior.hpp"

namespace dpsb::eval {

// 10 log10(||est - truth||^2 / ||gold - truth||^2); 0 means the method matched
// the gold-standard posterior mean.
double mmse_gap_db(const levy::Signal& est_mean, const levy::Signal& gold_mean,
                   const levy::Signal& truth);

// Unnormalized log-posterior of the Gaussian-likelihood inverse problem; the
// additive constant is shared across methods so rankings are valid.
double log_posterior(const fwd::ForwardModel& model, const Eigen::VectorXd& y, double sigma_n,
                     const levy::JumpLaw& law, const levy::Signal& x);

struct CoverageRecord {
  double alpha = 0.0;
  std::vector<bool> covered;
  double coverage = 0.0;
};

// Empirical highest-posterior-density check: per item, sort the samples'
// log-posteriors descending and threshold at the ceil(alpha N)-th; the truth
// is covered when its log-posterior reaches that threshold.
CoverageRecord hpd_coverage(const std::vector<Eigen::MatrixXd>& samples_per_item,
                            const std::vector<levy::Signal>& truths,
                            const std::function<double(int, const levy::Signal&)>& log_post,
                            double alpha);

struct WilcoxonResult {
  double p_two_sided = 1.0;
  double median_diff = 0.0;
  int n_nonzero = 0;
};

// Signed-rank test with zeros dropped, tied ranks averaged, and a tie-corrected
// normal approximation with continuity correction.
WilcoxonResult wilcoxon_signed_rank(const std::vector<double>& differences);

// Quantile-coupling Wasserstein-1 between two empirical distributions; exact
// for unequal sample counts via the merged quantile breakpoints.
double wasserstein1_1d(std::vector<double> a, std::vector<double> b);

// sup_x |empirical CDF - cdf(x)|.
double ks_distance(std::vector<double> samples, const std::function<double(double)>& cdf);

struct BurnInTrace {
  std::vector<double> w1;     // one value per window start (1-based iteration)
  int window = 0;
  int n_avg = 0;
  double plateau = 0.0;       // median of the second half of the trace
  int iterations_to_plateau = 0;  // first window start within 1.5x plateau
};

// Burn-in length protocol: C parallel chains on a fixed denoising
// datum, monitoring the Wasserstein-1 distance between the pooled jump at
// index 32 in a sliding window and in the final n_avg iterations.
BurnInTrace burn_in_diagnostic(const levy::JumpLaw& law, double sigma_n, int n_chains, int n_avg,
                               int window, int total_iters, int d, std::uint64_t seed);

struct SampleCountResult {
  int window = 0;
  bool reached = false;
  std::vector<double> mse_curve;  // normalized MSE per window length
};

// Smallest trailing-window length whose single-chain mean is within tol of the
// many-chain long-run MMSE (MSE normalized by sigma_n^2 and the dimension).
SampleCountResult sample_count_diagnostic(const levy::JumpLaw& law, double sigma_n, int n_chains,
                                          int n_avg, double tol, int d, std::uint64_t seed);

}  // namespace dpsb::eval
