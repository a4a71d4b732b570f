#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace dpsb {

// Counter-based seed derivation: every worker (chain, trajectory, grid point,
// dataset item) owns a stream derived from (master, tag, indices...), so the
// schedule of parallel execution cannot change any result.
std::uint64_t derive_seed(std::uint64_t master, std::string_view tag,
                          std::initializer_list<std::uint64_t> indices = {});

// Random stream with explicit, platform-independent transforms. The engine is
// std::mt19937_64 (bit-exact per the C++ standard); all distribution transforms
// are implemented here rather than via std::*_distribution, whose output is
// implementation-defined.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Strictly inside (0, 1).
  double uniform() {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  double normal();

  // Exponential with the given rate (mean 1/rate).
  double exponential(double rate);

  // Gamma in the shape/rate parametrization (Marsaglia and Tsang, 2000).
  double gamma(double shape, double rate);

  // Inverse Gaussian with mean mu and shape lambda (Michael, Schucany, Haas).
  double inverse_gaussian(double mu, double lambda);

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

inline RandomStream derive_stream(std::uint64_t master, std::string_view tag,
                                  std::initializer_list<std::uint64_t> indices = {}) {
  return RandomStream(derive_seed(master, tag, indices));
}

}  // namespace dpsb
