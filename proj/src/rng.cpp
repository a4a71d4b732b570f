#include "dpsb/rng.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace dpsb {

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ull;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t master, std::string_view tag,
                          std::initializer_list<std::uint64_t> indices) {
  std::uint64_t state = master ^ 0x6a09e667f3bcc909ull;
  for (char c : tag) {
    state ^= static_cast<std::uint64_t>(static_cast<unsigned char>(c));
    (void)splitmix64(state);
  }
  for (std::uint64_t idx : indices) {
    state ^= idx;
    (void)splitmix64(state);
  }
  std::uint64_t final_state = state;
  return splitmix64(final_state);
}

double RandomStream::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(theta);
  has_spare_ = true;
  return r * std::cos(theta);
}

double RandomStream::exponential(double rate) {
  if (!(rate > 0.0)) throw std::invalid_argument("exponential: rate must be > 0");
  return -std::log(uniform()) / rate;
}

double RandomStream::gamma(double shape, double rate) {
  if (!(shape > 0.0) || !(rate > 0.0)) {
    throw std::invalid_argument("gamma: shape and rate must be > 0");
  }
  if (shape < 1.0) {
    // Boost to shape + 1, then scale back (Marsaglia-Tsang, section 6).
    const double g = gamma(shape + 1.0, 1.0);
    return g * std::pow(uniform(), 1.0 / shape) / rate;
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x;
    double v;
    do {
      x = normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = uniform();
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * v / rate;
    if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v / rate;
  }
}

double RandomStream::inverse_gaussian(double mu, double lambda) {
  if (!(mu > 0.0) || !(lambda > 0.0)) {
    throw std::invalid_argument("inverse_gaussian: mu and lambda must be > 0");
  }
  const double z = normal();
  const double nu = z * z;
  // Stable rearrangement of the usual root formula; exact for all mu/lambda.
  const double s = 4.0 * lambda / (mu * nu);
  double x;
  if (std::isfinite(s)) {
    const double root = std::sqrt(1.0 + s);
    x = mu * s / ((root + 1.0) * (root + 1.0));
  } else {
    x = mu;
  }
  const double u = uniform();
  if (u <= mu / (mu + x)) return x;
  return mu * mu / x;
}

}  // namespace dpsb
