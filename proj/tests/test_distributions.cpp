#include <doctest.h>

#include <cmath>
#include <numbers>

#include "dpsb/distributions.hpp"
#include "dpsb/special_functions.hpp"
#include "support/oracles.hpp"

using namespace dpsb;
using dist::UnivariateLaw;

namespace {

double sample_mean(const UnivariateLaw& law, int n, std::uint64_t seed) {
  RandomStream rng(seed);
  double sum = 0.0;
  for (int i = 0; i < n; ++i) sum += dist::sample_univariate(law, rng);
  return sum / n;
}

double ks_against(const UnivariateLaw& law, const std::function<double(double)>& cdf, int n,
                  std::uint64_t seed) {
  RandomStream rng(seed);
  std::vector<double> draws(n);
  for (int i = 0; i < n; ++i) draws[i] = dist::sample_univariate(law, rng);
  std::sort(draws.begin(), draws.end());
  double distance = 0.0;
  for (int i = 0; i < n; ++i) {
    const double f = cdf(draws[i]);
    distance = std::max(distance, std::fabs((i + 1.0) / n - f));
    distance = std::max(distance, std::fabs(static_cast<double>(i) / n - f));
  }
  return distance;
}

}  // namespace

TEST_CASE("parameter domains are enforced") {
  CHECK_THROWS_AS(dist::Gauss(0.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(dist::Gauss(0.0, -1.0), std::invalid_argument);
  CHECK_THROWS_AS(dist::Exp(0.0), std::invalid_argument);
  CHECK_THROWS_AS(dist::Laplace(-1.0), std::invalid_argument);
  CHECK_THROWS_AS(dist::StudentT(0.0), std::invalid_argument);
  CHECK_THROWS_AS(dist::Gamma(1.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(dist::Gig(0.0, 1.0, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(dist::BernoulliLaplace(1.5, 1.0), std::invalid_argument);
  RandomStream rng(1);
  CHECK_THROWS_AS(dist::sample_gig(1.0, 0.0, 0.5, rng), std::invalid_argument);
  CHECK_THROWS_AS(dist::sample_gig(-1.0, 1.0, 0.5, rng), std::invalid_argument);
}

TEST_CASE("log densities match closed forms") {
  CHECK(dist::log_density_univariate(dist::Gauss(0.0, 1.0), 0.0) ==
        doctest::Approx(-0.9189385332046727).epsilon(1e-12));
  CHECK(dist::log_density_univariate(dist::Laplace(1.0), 2.0) ==
        doctest::Approx(std::log(0.5) - 2.0).epsilon(1e-12));
  // St(1) at 1: Gamma(1) = 1, Gamma(1/2) = sqrt(pi) collapse to 1/(2 pi).
  CHECK(dist::log_density_univariate(dist::StudentT(1.0), 1.0) ==
        doctest::Approx(std::log(1.0 / (2.0 * std::numbers::pi))).epsilon(1e-12));
  CHECK(dist::log_density_univariate(dist::Exp(2.0), -0.5) ==
        -std::numeric_limits<double>::infinity());
  CHECK(dist::log_density_univariate(dist::Gamma(2.0, 3.0), 0.0) ==
        -std::numeric_limits<double>::infinity());
}

TEST_CASE("bernoulli-laplace uses the mixed reference measure") {
  CHECK(dist::log_density_univariate(dist::BernoulliLaplace(0.1, 1.0), 0.0) ==
        doctest::Approx(std::log(0.1)).epsilon(1e-12));
  CHECK(dist::log_density_univariate(dist::BernoulliLaplace(0.1, 2.0), 0.5) ==
        doctest::Approx(std::log(0.9) + std::log(1.0) - 1.0).epsilon(1e-12));

  // atom_prob = 1 forces the atom: every draw is the literal 0.0.
  RandomStream rng(7);
  const UnivariateLaw all_atom = dist::BernoulliLaplace(1.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    if (dist::sample_univariate(all_atom, rng) != 0.0) FAIL("atom draw was not exactly zero");
  }

  // Atom frequency and the continuous branch, checked separately.
  const UnivariateLaw bl = dist::BernoulliLaplace(0.1, 1.0);
  RandomStream rng2(8);
  int zeros = 0;
  std::vector<double> continuous;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const double x = dist::sample_univariate(bl, rng2);
    if (x == 0.0) {
      ++zeros;
    } else {
      continuous.push_back(x);
    }
  }
  CHECK(std::fabs(zeros / static_cast<double>(n) - 0.1) < 0.005);
  std::sort(continuous.begin(), continuous.end());
  double ks = 0.0;
  const double m = static_cast<double>(continuous.size());
  for (std::size_t i = 0; i < continuous.size(); ++i) {
    const double f = oracle::laplace_cdf(continuous[i], 1.0);
    ks = std::max(ks, std::fabs((i + 1.0) / m - f));
    ks = std::max(ks, std::fabs(i / m - f));
  }
  CHECK(ks < 0.01);
}

TEST_CASE("student-t moments match the analytic variance") {
  // Var St(3) = nu/(nu-2) = 3, cross-checked by quadrature of the density.
  const double quad_var = oracle::integrate_real_line([](double x) {
    const double log_pdf =
        std::lgamma(2.0) - std::lgamma(1.5) - 0.5 * std::log(3.0 * std::numbers::pi) -
        2.0 * std::log1p(x * x / 3.0);
    return x * x * std::exp(log_pdf);
  });
  CHECK(quad_var == doctest::Approx(3.0).epsilon(1e-4));

  RandomStream rng(12345);
  const UnivariateLaw st3 = dist::StudentT(3.0);
  const int n = 1000000;
  double sum = 0.0;
  double sum_sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = dist::sample_univariate(st3, rng);
    sum += x;
    sum_sq += x * x;
  }
  const double mean = sum / n;
  const double var = sum_sq / n - mean * mean;
  CHECK(std::fabs(var - 3.0) / 3.0 < 0.05);
}

TEST_CASE("every continuous law integrates to one") {
  const auto total_mass = [](const UnivariateLaw& law, bool positive_support) {
    const auto pdf = [&](double x) {
      return std::exp(dist::log_density_univariate(law, x));
    };
    return positive_support ? oracle::integrate_positive_line(pdf)
                            : oracle::integrate_real_line(pdf);
  };
  CHECK(total_mass(dist::Gauss(0.3, 2.0), false) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(total_mass(dist::Laplace(0.7), false) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(total_mass(dist::StudentT(1.0), false) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(total_mass(dist::StudentT(2.5), false) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(total_mass(dist::Exp(1.7), true) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(total_mass(dist::Gamma(0.5, 0.5), true) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(total_mass(dist::Gamma(3.0, 2.0), true) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(total_mass(dist::Gig(1.0, 1.0, 0.5), true) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(total_mass(dist::Gig(2.0, 3.0, -1.2), true) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("log_bessel_k agrees with half-integer closed forms") {
  for (const double z : {0.1, 1.0, 4.0, 50.0, 700.0}) {
    const double k_half = 0.5 * std::log(std::numbers::pi / (2.0 * z)) - z;
    CHECK(log_bessel_k(0.5, z) == doctest::Approx(k_half).epsilon(1e-9));
    CHECK(log_bessel_k(1.5, z) == doctest::Approx(k_half + std::log1p(1.0 / z)).epsilon(1e-9));
    CHECK(log_bessel_k(2.5, z) ==
          doctest::Approx(k_half + std::log(1.0 + 3.0 / z + 3.0 / (z * z))).epsilon(1e-9));
  }
  // Spot checks against the standard library implementation.
  for (const double p : {0.0, 0.3, 2.0}) {
    for (const double z : {0.5, 2.0, 10.0}) {
      CHECK(log_bessel_k(p, z) == doctest::Approx(std::log(std::cyl_bessel_k(p, z))).epsilon(1e-8));
    }
  }
}

TEST_CASE("gig sampler matches Bessel-ratio means") {
  // mean = sqrt(b/a) K_{p+1}(sqrt(ab)) / K_p(sqrt(ab)); the half-integer
  // recurrence gives 2.0 and 0.75 for these settings.
  const auto bessel_mean = [](double a, double b, double p) {
    const double omega = std::sqrt(a * b);
    return std::sqrt(b / a) * std::exp(log_bessel_k(p + 1.0, omega) - log_bessel_k(p, omega));
  };
  CHECK(bessel_mean(1.0, 1.0, 0.5) == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(bessel_mean(4.0, 1.0, 0.5) == doctest::Approx(0.75).epsilon(1e-9));

  RandomStream rng(99);
  const int n = 1000000;
  double sum_11 = 0.0;
  double sum_41 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x11 = dist::sample_gig(1.0, 1.0, 0.5, rng);
    const double x41 = dist::sample_gig(4.0, 1.0, 0.5, rng);
    if (!(x11 > 0.0) || !(x41 > 0.0)) FAIL("gig draw outside the support");
    sum_11 += x11;
    sum_41 += x41;
  }
  CHECK(std::fabs(sum_11 / n - 2.0) / 2.0 < 0.02);
  CHECK(std::fabs(sum_41 / n - 0.75) / 0.75 < 0.02);

  // General order goes through the Devroye sampler; check against the same
  // Bessel-ratio oracle, including a negative order.
  for (const auto [a, b, p] : {std::tuple{2.0, 3.0, 1.7}, {1.5, 0.8, 0.0}, {2.0, 3.0, -1.2}}) {
    const double expected = bessel_mean(a, b, p);
    double sum = 0.0;
    const int m = 400000;
    for (int i = 0; i < m; ++i) sum += dist::sample_gig(a, b, p, rng);
    CHECK(std::fabs(sum / m - expected) / expected < 0.02);
  }

  // b = 0 limit of the latent-step helper is Gamma(p, a/2).
  double sum_limit = 0.0;
  for (int i = 0; i < 200000; ++i) {
    const double x = dist::sample_gig_or_gamma_limit(3.0, 0.0, 0.5, rng);
    if (!(x > 0.0)) FAIL("gamma-limit draw outside the support");
    sum_limit += x;
  }
  CHECK(std::fabs(sum_limit / 200000 - (0.5 / 1.5)) < 0.01);
}

TEST_CASE("empirical CDFs match analytic CDFs") {
  const int n = 100000;
  CHECK(ks_against(dist::Gauss(0.5, 2.0),
                   [](double x) { return oracle::gauss_cdf(x, 0.5, 2.0); }, n, 21) < 0.01);
  CHECK(ks_against(dist::Exp(1.3), [](double x) { return oracle::exponential_cdf(x, 1.3); }, n,
                   22) < 0.01);
  CHECK(ks_against(dist::Laplace(0.8), [](double x) { return oracle::laplace_cdf(x, 0.8); }, n,
                   23) < 0.01);
  for (const double nu : {1.0, 2.0, 3.0}) {
    CHECK(ks_against(dist::StudentT(nu), [nu](double x) { return oracle::student_cdf(x, nu); }, n,
                     24) < 0.01);
  }
  CHECK(ks_against(dist::Gamma(2.5, 1.5),
                   [](double x) { return oracle::gamma_cdf(x, 2.5, 1.5); }, n, 25) < 0.01);
  CHECK(ks_against(dist::Gamma(0.5, 0.5),
                   [](double x) { return oracle::gamma_cdf(x, 0.5, 0.5); }, n, 26) < 0.01);

  // GIG against a quadrature CDF of the unnormalized density.
  for (const auto [a, b, p] : {std::tuple{1.0, 1.0, 0.5}, {2.0, 3.0, 1.7}, {4.0, 1.0, -0.5}}) {
    const oracle::NumericCdf cdf(
        [a = a, b = b, p = p](double x) {
          return std::pow(x, p - 1.0) * std::exp(-0.5 * (a * x + b / x));
        },
        60.0);
    CHECK(ks_against(dist::Gig(a, b, p), [&](double x) { return cdf(x); }, n, 27) < 0.01);
  }
}

TEST_CASE("precision-form gaussian sampling") {
  const int d = 6;
  Eigen::MatrixXd precision = Eigen::MatrixXd::Identity(d, d);
  Eigen::VectorXd shift(d);
  shift << 1, -2, 0.5, 3, -1, 0.25;

  SUBCASE("identity precision reproduces mean and covariance") {
    const dist::PrecisionGaussian g(precision, shift);
    RandomStream rng(31);
    const int n = 100000;
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(d);
    Eigen::MatrixXd second = Eigen::MatrixXd::Zero(d, d);
    for (int i = 0; i < n; ++i) {
      const Eigen::VectorXd x = g.sample(rng);
      mean += x;
      second += x * x.transpose();
    }
    mean /= n;
    const Eigen::MatrixXd cov = second / n - mean * mean.transpose();
    CHECK((mean - shift).norm() < 0.03 * shift.norm());
    CHECK((cov - Eigen::MatrixXd::Identity(d, d)).norm() <
          0.03 * Eigen::MatrixXd::Identity(d, d).norm() * std::sqrt(static_cast<double>(d)));
  }

  SUBCASE("scaled precision scales the variance") {
    const dist::PrecisionGaussian g(4.0 * precision, Eigen::VectorXd::Zero(d));
    RandomStream rng(32);
    const int n = 100000;
    Eigen::VectorXd sum_sq = Eigen::VectorXd::Zero(d);
    for (int i = 0; i < n; ++i) sum_sq += g.sample(rng).cwiseAbs2();
    for (int k = 0; k < d; ++k) CHECK(std::fabs(sum_sq[k] / n - 0.25) < 0.03 * 0.25);
  }

  SUBCASE("asymmetric precision is rejected") {
    Eigen::MatrixXd bad = precision;
    bad(0, 1) = 0.5;
    CHECK_THROWS_AS(dist::PrecisionGaussian(bad, shift), std::invalid_argument);
  }

  SUBCASE("linear statistics have the right variance") {
    Eigen::MatrixXd p(3, 3);
    p << 4.0, 1.0, 0.0, 1.0, 3.0, 0.5, 0.0, 0.5, 2.0;
    const Eigen::MatrixXd cov = p.inverse();
    const dist::PrecisionGaussian g(p, Eigen::VectorXd::Zero(3));
    Eigen::VectorXd v(3);
    v << 1.0, -2.0, 0.5;
    const double expected = v.dot(cov * v);
    RandomStream rng(33);
    const int n = 200000;
    double sum = 0.0;
    double sum_sq = 0.0;
    for (int i = 0; i < n; ++i) {
      const double s = v.dot(g.sample(rng));
      sum += s;
      sum_sq += s * s;
    }
    const double var = sum_sq / n - (sum / n) * (sum / n);
    CHECK(std::fabs(var - expected) / expected < 0.03);
  }

  SUBCASE("non positive definite precision fails after jitter retries") {
    Eigen::MatrixXd indefinite = Eigen::MatrixXd::Identity(d, d);
    indefinite(0, 0) = -5.0;
    CHECK_THROWS_AS(dist::PrecisionGaussian(indefinite, shift), std::runtime_error);
  }
}
