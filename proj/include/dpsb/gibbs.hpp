#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "dpsb/forward_models.hpp"
#include "dpsb/levy_prior.hpp"
#include "dpsb/rng.hpp"

namespace dpsb::gibbs {

struct ChainResult {
  Eigen::MatrixXd draws;  // d x S, one retained draw per column
  int burn_in = 0;
  std::uint64_t seed = 0;
};

struct ChainSummary {
  Eigen::VectorXd mean;
  Eigen::VectorXd marginal_var;
  Eigen::MatrixXd covariance;  // unbiased, S-1 normalization
};

ChainSummary chain_statistics(const Eigen::MatrixXd& draws);
inline ChainSummary chain_statistics(const ChainResult& result) {
  return chain_statistics(result.draws);
}

// ---------------------------------------------------------------------------
// Latent-variable Gibbs sampler for Gaussian, Laplace, and Student-t jumps.
// The posterior factors as a product over the rows of K = [A; D]: the first m
// factors are Gauss(y_k, sigma_n^2), the last d are the jump law, each with a
// Gaussian scale-mixture latent. Conditioned on the latents the signal draw is
// Gaussian in precision form; conditioned on the signal the latents are
// independent one-dimensional draws.
// ---------------------------------------------------------------------------

struct GlmProblem {
  const fwd::ForwardModel* model = nullptr;
  Eigen::VectorXd y;
  double sigma_n = 0.0;
  levy::JumpLaw law;  // Gauss/Laplace/Student; Bernoulli-Laplace has its own sampler

  GlmProblem(const fwd::ForwardModel& model_arg, Eigen::VectorXd y_arg, double sigma_n_arg,
             levy::JumpLaw law_arg);
};

// One latent draw per jump factor. Gaussian jump factors have the degenerate
// latent delta(0) and come back as zeros.
Eigen::VectorXd glm_latent_step(const GlmProblem& problem, const levy::Signal& x,
                                RandomStream& rng);
levy::Signal glm_signal_step(const GlmProblem& problem, const Eigen::VectorXd& z,
                             RandomStream& rng);

ChainResult run_glm_chain(const GlmProblem& problem, int burn_in, int samples,
                          const levy::Signal& init, std::uint64_t seed, int thin = 1);

// ---------------------------------------------------------------------------
// Partially collapsed Gibbs sampler for Bernoulli-Laplace jumps, operating on
// the increments u with support bits v and scales w. The support sweep keeps
//   B(v, w) = sigma_n^2 I + H diag(v .* w) H^T,   H = A D^{-1},
// current through rank-one determinant/inverse updates; log|B| and y^T B^{-1} y
// are cached and refreshed from scratch once per outer iteration.
// ---------------------------------------------------------------------------

class BlConditional {
 public:
  BlConditional(Eigen::MatrixXd H, Eigen::VectorXd y, double sigma_n, double atom_prob,
                double slab_rate);

  int dim() const { return static_cast<int>(gram_.rows()); }

  // Full refresh of the cached quantities at the given latent state.
  void set_latents(const Eigen::VectorXd& w, const std::vector<std::uint8_t>& v);

  // Log-odds of turning bit k on, with bit k currently off in the cache.
  double flip_log_odds(int k) const;

  // Same log-odds evaluated from the cache in either bit state; when the bit
  // is on, the off-state scalars are recovered algebraically instead of
  // downdating, so a sweep only pays for bits that actually flip.
  double support_log_odds(int k) const;

  // Rank-one transition between the bit-k-off and bit-k-on states.
  void set_bit(int k, bool on);

  bool bit(int k) const { return v_[k] != 0; }
  double w(int k) const { return w_[k]; }
  double log_det_b() const { return log_det_b_; }
  double quad_form() const { return quad_; }
  double log_prior_odds() const { return log_prior_odds_; }

  // Dense reference values for the current (v, w); used to bound update drift.
  double dense_log_det_b() const;
  double dense_quad_form() const;

  const Eigen::MatrixXd& H() const { return h_mat_; }
  const Eigen::MatrixXd& gram() const { return gram_; }
  const Eigen::VectorXd& adjoint_y() const { return hy_; }
  const Eigen::VectorXd& y() const { return y_; }
  double sigma_n() const { return sigma_n_; }
  double atom_prob() const { return atom_prob_; }
  double slab_rate() const { return slab_rate_; }

 private:
  Eigen::MatrixXd h_mat_;   // m x d
  Eigen::MatrixXd gram_;    // H^T H
  Eigen::VectorXd hy_;      // H^T y
  Eigen::VectorXd y_;
  double yy_ = 0.0;
  double sigma_n_ = 0.0;
  double atom_prob_ = 0.0;
  double slab_rate_ = 0.0;
  double log_prior_odds_ = 0.0;

  Eigen::VectorXd w_;
  std::vector<std::uint8_t> v_;
  Eigen::MatrixXd proj_;    // H^T B^{-1} H
  Eigen::VectorXd proj_y_;  // H^T B^{-1} y
  double log_det_b_ = 0.0;
  double quad_ = 0.0;

  // Scratch space so the per-iteration refresh and the per-flip updates do
  // not allocate.
  Eigen::VectorXd flip_col_;
  Eigen::MatrixXd gram_on_;
  Eigen::MatrixXd core_;
  Eigen::MatrixXd solved_;
  std::vector<int> on_scratch_;
};

// Log-odds with bit k off; adjusts the cache to the off state if needed and
// leaves it there.
double bl_flip_logodds(BlConditional& state, int k);

ChainResult run_bl_chain(const fwd::ForwardModel& model, const Eigen::VectorXd& y,
                         double atom_prob, double slab_rate, double sigma_n, int burn_in,
                         int samples, const Eigen::VectorXd& init_u, std::uint64_t seed,
                         int thin = 1);

// Matrix H = A D^{-1}; column k is A applied to the step function 1_{i >= k}.
Eigen::MatrixXd integrated_operator(const fwd::ForwardModel& model);

// Chain dispatch on the jump law; init is a signal-domain warm start.
ChainResult run_posterior_chain(const fwd::ForwardModel& model, const Eigen::VectorXd& y,
                                double sigma_n, const levy::JumpLaw& law, int burn_in,
                                int samples, const levy::Signal& init, std::uint64_t seed,
                                int thin = 1);

}  // namespace dpsb::gibbs
