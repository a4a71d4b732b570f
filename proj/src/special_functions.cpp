#include "dpsb/special_functions.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace dpsb {

double log_cosh(double x) {
  const double a = std::fabs(x);
  return a + std::log1p(std::exp(-2.0 * a)) - std::numbers::ln2;
}

double normal_cdf(double x) {
  return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

// K_p(z) = e^{-z} \int_0^\infty e^{-z(cosh t - 1)} cosh(p t) dt.  The integrand
// is unimodal; we locate its peak, shift it out, and integrate the remainder
// with composite Simpson on a truncated interval.
double log_bessel_k(double p, double z) {
  if (!(z > 0.0)) throw std::invalid_argument("log_bessel_k: z must be > 0");
  p = std::fabs(p);  // K_{-p} = K_p

  const auto log_integrand = [&](double t) {
    return -z * (std::cosh(t) - 1.0) + log_cosh(p * t);
  };

  // Peak of the log-integrand: z sinh t = p tanh(p t); t* <= asinh(p/z).
  double t_peak = 0.0;
  if (p > 0.0) {
    double lo = 0.0;
    double hi = std::asinh(p / z) + 1e-12;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      const double grad = -z * std::sinh(mid) + p * std::tanh(p * mid);
      (grad > 0.0 ? lo : hi) = mid;
    }
    t_peak = 0.5 * (lo + hi);
  }
  const double log_max = log_integrand(t_peak);

  // Truncate where the integrand has decayed by ~e^-50 on both sides.
  double t_hi = t_peak + 1.0;
  while (log_integrand(t_hi) - log_max > -50.0) t_hi *= 2.0;

  const int n = 4096;  // even
  const double h = t_hi / n;
  double sum = std::exp(log_integrand(0.0) - log_max) + std::exp(log_integrand(t_hi) - log_max);
  for (int i = 1; i < n; ++i) {
    const double w = (i % 2 == 1) ? 4.0 : 2.0;
    sum += w * std::exp(log_integrand(i * h) - log_max);
  }
  const double integral = sum * h / 3.0;
  return -z + log_max + std::log(integral);
}

}  // namespace dpsb
