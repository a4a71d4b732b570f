#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <memory>
#include <string>

#include "dpsb/forward_models.hpp"
#include "dpsb/levy_prior.hpp"
#include "dpsb/rng.hpp"

namespace dpsb::diff {

// Variance-preserving schedule: beta_t linear between the endpoints, with
// alpha_t = 1 - beta_t, abar_t the running product, and the matched denoising
// noise level sigma_t^2 = (1 - abar_t) / abar_t. Index t runs 1..T; abar_0 = 1.
struct DiffusionSchedule {
  int T = 0;
  Eigen::VectorXd beta;       // beta[t-1] = beta_t
  Eigen::VectorXd alpha;      // 1 - beta
  Eigen::VectorXd alpha_bar;  // cumulative product
  Eigen::VectorXd sigma;      // sqrt((1 - abar)/abar)

  double beta_at(int t) const { return beta[t - 1]; }
  double alpha_at(int t) const { return alpha[t - 1]; }
  double alpha_bar_at(int t) const { return t == 0 ? 1.0 : alpha_bar[t - 1]; }
  double sigma_at(int t) const { return sigma[t - 1]; }
};

DiffusionSchedule build_schedule(int T, double beta_0, double beta_T);
// T = 1000, beta endpoints 1e-4 and 2e-2.
DiffusionSchedule default_schedule();

// Contract for the inner denoising-posterior sampler: S draws from
// exp(-||. - x||^2 / (2 sigma^2)) p_X0(.), returned as d x S. Implementations
// must be safe to call concurrently with distinct random streams.
class Denoiser {
 public:
  virtual ~Denoiser() = default;
  virtual Eigen::MatrixXd draw(const Eigen::VectorXd& x_noisy, double sigma, int n_samples,
                               RandomStream& rng) const = 0;
};

// Exact denoising-posterior sampler: a Gibbs chain on the identity-operator
// problem, warm-started at the noisy iterate.
class OracleDenoiser final : public Denoiser {
 public:
  OracleDenoiser(levy::JumpLaw law, int d, int burn_in = 100);
  Eigen::MatrixXd draw(const Eigen::VectorXd& x_noisy, double sigma, int n_samples,
                       RandomStream& rng) const override;

 private:
  levy::JumpLaw law_;
  fwd::ForwardModel identity_;
  int burn_in_;
};

// External denoiser behind a subprocess speaking the framed binary protocol
// described in the README: requests carry (d, S, sigma, x), responses carry
// the S draws, all little-endian float64.
class SubprocessDenoiser final : public Denoiser {
 public:
  explicit SubprocessDenoiser(std::string command);
  ~SubprocessDenoiser() override;
  Eigen::MatrixXd draw(const Eigen::VectorXd& x_noisy, double sigma, int n_samples,
                       RandomStream& rng) const override;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Denoising draws at diffusion time t (x_t given in x0-scale).
Eigen::MatrixXd oracle_denoise(const levy::Signal& x_t, int t, const DiffusionSchedule& schedule,
                               const levy::JumpLaw& law, int n_samples, RandomStream& rng,
                               int burn_in = 100);

// Score of the noisy marginal via the MMSE estimate (ambient scale):
// -(x - sqrt(abar_t) mmse) / (1 - abar_t).
levy::Signal tweedie_score(const levy::Signal& x, int t, const DiffusionSchedule& schedule,
                           const levy::Signal& mmse);

// Unconditional ancestral sampling of the reverse chain; the injected noise is
// suppressed on the final step.
levy::Signal ddpm_prior_sample(const Denoiser& denoiser, const DiffusionSchedule& schedule, int d,
                               int denoiser_samples, RandomStream& rng);

// Unbiased sample covariance of denoising draws, and the Jacobian of the
// ambient MMSE map obtained from it by the sqrt(abar_t)/(1-abar_t) scaling.
Eigen::MatrixXd covariance_statistic(const Eigen::MatrixXd& draws);
Eigen::MatrixXd jacobian_from_covariance(const Eigen::MatrixXd& cov, int t,
                                         const DiffusionSchedule& schedule);

}  // namespace dpsb::diff
