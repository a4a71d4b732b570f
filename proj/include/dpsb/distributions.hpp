#pragma once

#include <Eigen/Dense>
#include <variant>

#include "dpsb/rng.hpp"

namespace dpsb::dist {

// Univariate laws. Parameters follow the conventions used throughout:
//   Gauss(mu, var)            (2 pi var)^{-1/2} exp(-(x-mu)^2 / (2 var))
//   Exp(rate)                 rate exp(-rate x),  x >= 0
//   Laplace(scale)            exp(-|x|/scale) / (2 scale)
//   StudentT(nu)              Gamma((nu+1)/2)/(sqrt(pi nu) Gamma(nu/2)) (1+x^2/nu)^{-(nu+1)/2}
//   Gamma(shape, rate)        rate^shape/Gamma(shape) x^{shape-1} exp(-rate x),  x > 0
//   Gig(a, b, p)              (a/b)^{p/2}/(2 K_p(sqrt(ab))) x^{p-1} exp(-(a x + b/x)/2),  x > 0
//   BernoulliLaplace(l, rate) l delta(x) + (1-l) (rate/2) exp(-rate |x|)
//
// The Bernoulli-Laplace density is taken w.r.t. Lebesgue measure plus a unit
// atom at zero, so log_density(BL, 0.0) = log(l) exactly and the continuous
// branch applies everywhere else. Draws that hit the atom are the literal
// value 0.0.

struct Gauss {
  double mu, var;
  Gauss(double mu, double var);
};

struct Exp {
  double rate;
  explicit Exp(double rate);
};

struct Laplace {
  double scale;
  explicit Laplace(double scale);
};

struct StudentT {
  double nu;
  explicit StudentT(double nu);
};

struct Gamma {
  double shape, rate;
  Gamma(double shape, double rate);
};

struct Gig {
  double a, b, p;
  Gig(double a, double b, double p);
};

struct BernoulliLaplace {
  double atom_prob, rate;
  BernoulliLaplace(double atom_prob, double rate);
};

using UnivariateLaw =
    std::variant<Gauss, Exp, Laplace, StudentT, Gamma, Gig, BernoulliLaplace>;

double sample_univariate(const UnivariateLaw& law, RandomStream& rng);
double log_density_univariate(const UnivariateLaw& law, double x);

// Devroye (2012) rejection sampler, with the exact inverse-Gaussian shortcut
// for |p| = 1/2. Requires a, b > 0.
double sample_gig(double a, double b, double p, RandomStream& rng);

// GIG(a, b, p) draw that degenerates to the Gamma(p, a/2) limit at b = 0;
// used by the Gibbs latent steps where b is a squared residual that can be
// exactly zero. Requires p > 0 when b = 0.
double sample_gig_or_gamma_limit(double a, double b, double p, RandomStream& rng);

// Multivariate Gaussian in precision form: mean = precision^{-1} shift,
// covariance = precision^{-1}. The factorization is computed on construction;
// a diagonal jitter of 1e-10 trace/d is added only if it fails, growing 10x
// for at most 3 retries.
class PrecisionGaussian {
 public:
  PrecisionGaussian(Eigen::MatrixXd precision, Eigen::VectorXd shift);

  const Eigen::VectorXd& mean() const { return mean_; }
  Eigen::Index dim() const { return mean_.size(); }
  Eigen::VectorXd sample(RandomStream& rng) const;

 private:
  Eigen::LLT<Eigen::MatrixXd> llt_;
  Eigen::VectorXd mean_;
};

inline Eigen::VectorXd sample_mv_gaussian(const PrecisionGaussian& g, RandomStream& rng) {
  return g.sample(rng);
}

}  // namespace dpsb::dist
