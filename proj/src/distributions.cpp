#include "dpsb/distributions.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "dpsb/special_functions.hpp"

namespace dpsb::dist {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

[[noreturn]] void domain_error(const char* what) { throw std::invalid_argument(what); }

}  // namespace

Gauss::Gauss(double mu_arg, double var_arg) : mu(mu_arg), var(var_arg) {
  if (!(var > 0.0)) domain_error("Gauss: variance must be > 0");
}

Exp::Exp(double rate_arg) : rate(rate_arg) {
  if (!(rate > 0.0)) domain_error("Exp: rate must be > 0");
}

Laplace::Laplace(double scale_arg) : scale(scale_arg) {
  if (!(scale > 0.0)) domain_error("Laplace: scale must be > 0");
}

StudentT::StudentT(double nu_arg) : nu(nu_arg) {
  if (!(nu > 0.0)) domain_error("StudentT: nu must be > 0");
}

Gamma::Gamma(double shape_arg, double rate_arg) : shape(shape_arg), rate(rate_arg) {
  if (!(shape > 0.0) || !(rate > 0.0)) domain_error("Gamma: shape and rate must be > 0");
}

Gig::Gig(double a_arg, double b_arg, double p_arg) : a(a_arg), b(b_arg), p(p_arg) {
  if (!(a > 0.0) || !(b > 0.0)) domain_error("Gig: a and b must be > 0");
}

BernoulliLaplace::BernoulliLaplace(double atom_prob_arg, double rate_arg)
    : atom_prob(atom_prob_arg), rate(rate_arg) {
  if (!(atom_prob >= 0.0 && atom_prob <= 1.0)) {
    domain_error("BernoulliLaplace: atom probability must be in [0, 1]");
  }
  if (!(rate > 0.0)) domain_error("BernoulliLaplace: rate must be > 0");
}

namespace {

double sample_laplace(double scale, RandomStream& rng) {
  const double magnitude = -scale * std::log(rng.uniform());
  return rng.uniform() < 0.5 ? -magnitude : magnitude;
}

// Devroye, "Random variate generation for the generalized inverse Gaussian
// distribution", Statistics and Computing 24 (2012). Operates on the
// scale-free form x^{lam-1} exp(-omega (x + 1/x)/2) with lam >= 0.
double devroye_gig_standard(double lam, double omega, RandomStream& rng) {
  const double alpha = std::sqrt(omega * omega + lam * lam) - lam;
  const auto psi = [&](double x) {
    return -alpha * (std::cosh(x) - 1.0) - lam * (std::exp(x) - x - 1.0);
  };
  const auto psi_deriv = [&](double x) {
    return -alpha * std::sinh(x) - lam * (std::exp(x) - 1.0);
  };

  double t = 1.0;
  double v = -psi(1.0);
  if (v > 2.0) {
    t = std::sqrt(2.0 / (alpha + lam));
  } else if (v < 0.5) {
    t = std::log(4.0 / (alpha + 2.0 * lam));
  }
  double s = 1.0;
  v = -psi(-1.0);
  if (v > 2.0) {
    s = std::sqrt(4.0 / (alpha * std::cosh(1.0) + lam));
  } else if (v < 0.5) {
    const double cand = std::log(1.0 + 1.0 / alpha + std::sqrt(1.0 / (alpha * alpha) + 2.0 / alpha));
    s = lam > 0.0 ? std::min(1.0 / lam, cand) : cand;
  }

  const double eta = -psi(t);
  const double zeta = -psi_deriv(t);
  const double theta = -psi(-s);
  const double xi = psi_deriv(-s);
  const double p = 1.0 / xi;
  const double r = 1.0 / zeta;
  const double td = t - r * eta;
  const double sd = s - p * theta;
  const double q = td + sd;

  double x = 0.0;
  for (;;) {
    const double u = rng.uniform();
    const double w = rng.uniform();
    const double z = rng.uniform();
    if (u < q / (p + q + r)) {
      x = -sd + q * w;
    } else if (u < (q + r) / (p + q + r)) {
      x = td - r * std::log(w);
    } else {
      x = -sd + p * std::log(w);
    }
    double hat = 1.0;
    if (x > td) {
      hat = std::exp(-eta - zeta * (x - t));
    } else if (x < -sd) {
      hat = std::exp(-theta + xi * (x + s));
    }
    if (z * hat <= std::exp(psi(x))) break;
  }
  return (lam / omega + std::sqrt(1.0 + lam * lam / (omega * omega))) * std::exp(x);
}

}  // namespace

double sample_gig(double a, double b, double p, RandomStream& rng) {
  if (!(a > 0.0) || !(b > 0.0)) domain_error("sample_gig: a and b must be > 0");
  // Half-integer orders reduce to the inverse Gaussian, which has an exact
  // one-shot sampler: GIG(a,b,-1/2) = IG(sqrt(b/a), b) and 1/X flips the sign
  // of p. This is the order the Gibbs latent steps hit on every coordinate.
  if (p == 0.5) return 1.0 / rng.inverse_gaussian(std::sqrt(a / b), a);
  if (p == -0.5) return rng.inverse_gaussian(std::sqrt(b / a), b);

  const double omega = std::sqrt(a * b);
  if (!(omega > 0.0)) domain_error("sample_gig: sqrt(a*b) underflowed");
  const double lam = std::fabs(p);
  const double y = devroye_gig_standard(lam, omega, rng);
  const double scaled = y * std::sqrt(b / a);
  return p >= 0.0 ? scaled : std::sqrt(b / a) * std::sqrt(b / a) / scaled;
}

double sample_gig_or_gamma_limit(double a, double b, double p, RandomStream& rng) {
  if (b > 0.0) return sample_gig(a, b, p, rng);
  if (!(p > 0.0)) domain_error("sample_gig_or_gamma_limit: p must be > 0 at b = 0");
  return rng.gamma(p, 0.5 * a);
}

double sample_univariate(const UnivariateLaw& law, RandomStream& rng) {
  return std::visit(
      [&rng](const auto& l) -> double {
        using T = std::decay_t<decltype(l)>;
        if constexpr (std::is_same_v<T, Gauss>) {
          return l.mu + std::sqrt(l.var) * rng.normal();
        } else if constexpr (std::is_same_v<T, Exp>) {
          return rng.exponential(l.rate);
        } else if constexpr (std::is_same_v<T, Laplace>) {
          return sample_laplace(l.scale, rng);
        } else if constexpr (std::is_same_v<T, StudentT>) {
          const double z = rng.normal();
          const double chi2 = rng.gamma(0.5 * l.nu, 0.5);
          return z * std::sqrt(l.nu / chi2);
        } else if constexpr (std::is_same_v<T, Gamma>) {
          return rng.gamma(l.shape, l.rate);
        } else if constexpr (std::is_same_v<T, Gig>) {
          return sample_gig(l.a, l.b, l.p, rng);
        } else {
          static_assert(std::is_same_v<T, BernoulliLaplace>);
          if (rng.uniform() < l.atom_prob) return 0.0;
          return sample_laplace(1.0 / l.rate, rng);
        }
      },
      law);
}

double log_density_univariate(const UnivariateLaw& law, double x) {
  constexpr double half_log_2pi = 0.9189385332046727;
  return std::visit(
      [x](const auto& l) -> double {
        using T = std::decay_t<decltype(l)>;
        if constexpr (std::is_same_v<T, Gauss>) {
          const double r = x - l.mu;
          return -half_log_2pi - 0.5 * std::log(l.var) - 0.5 * r * r / l.var;
        } else if constexpr (std::is_same_v<T, Exp>) {
          if (x < 0.0) return kNegInf;
          return std::log(l.rate) - l.rate * x;
        } else if constexpr (std::is_same_v<T, Laplace>) {
          return -std::log(2.0 * l.scale) - std::fabs(x) / l.scale;
        } else if constexpr (std::is_same_v<T, StudentT>) {
          return std::lgamma(0.5 * (l.nu + 1.0)) - std::lgamma(0.5 * l.nu) -
                 0.5 * std::log(l.nu * std::numbers::pi) -
                 0.5 * (l.nu + 1.0) * std::log1p(x * x / l.nu);
        } else if constexpr (std::is_same_v<T, Gamma>) {
          if (x <= 0.0) return kNegInf;
          return l.shape * std::log(l.rate) - std::lgamma(l.shape) +
                 (l.shape - 1.0) * std::log(x) - l.rate * x;
        } else if constexpr (std::is_same_v<T, Gig>) {
          if (x <= 0.0) return kNegInf;
          return 0.5 * l.p * std::log(l.a / l.b) - std::numbers::ln2 -
                 log_bessel_k(l.p, std::sqrt(l.a * l.b)) + (l.p - 1.0) * std::log(x) -
                 0.5 * (l.a * x + l.b / x);
        } else {
          static_assert(std::is_same_v<T, BernoulliLaplace>);
          if (x == 0.0) return l.atom_prob > 0.0 ? std::log(l.atom_prob) : kNegInf;
          if (l.atom_prob >= 1.0) return kNegInf;
          return std::log1p(-l.atom_prob) + std::log(0.5 * l.rate) - l.rate * std::fabs(x);
        }
      },
      law);
}

PrecisionGaussian::PrecisionGaussian(Eigen::MatrixXd precision, Eigen::VectorXd shift) {
  if (precision.rows() != precision.cols() || precision.rows() != shift.size()) {
    domain_error("PrecisionGaussian: dimension mismatch");
  }
  const double scale = precision.cwiseAbs().maxCoeff();
  const double asym = (precision - precision.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-12 * std::max(scale, 1e-300)) {
    domain_error("PrecisionGaussian: precision matrix is not symmetric");
  }

  llt_.compute(precision);
  if (llt_.info() != Eigen::Success) {
    double jitter = 1e-10 * precision.trace() / static_cast<double>(precision.rows());
    for (int attempt = 0; attempt < 3 && llt_.info() != Eigen::Success; ++attempt) {
      Eigen::MatrixXd bumped = precision;
      bumped.diagonal().array() += jitter;
      llt_.compute(bumped);
      jitter *= 10.0;
    }
    if (llt_.info() != Eigen::Success) {
      throw std::runtime_error("PrecisionGaussian: precision matrix is not positive definite");
    }
  }
  mean_ = llt_.solve(shift);
}

Eigen::VectorXd PrecisionGaussian::sample(RandomStream& rng) const {
  Eigen::VectorXd z(dim());
  for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = rng.normal();
  // x = mean + L^{-T} z has covariance (L L^T)^{-1} = precision^{-1}.
  return mean_ + llt_.matrixU().solve(z);
}

}  // namespace dpsb::dist
