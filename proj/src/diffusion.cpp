#include "dpsb/diffusion.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <mutex>
#include <stdexcept>
#include <vector>

#if !defined(_WIN32)
#include <sys/types.h>
#include <unistd.h>
#endif

#include "dpsb/gibbs.hpp"

namespace dpsb::diff {

DiffusionSchedule build_schedule(int T, double beta_0, double beta_T) {
  if (T < 2) throw std::invalid_argument("build_schedule: T must be >= 2");
  if (!(beta_0 > 0.0) || !(beta_0 <= beta_T) || !(beta_T < 1.0)) {
    throw std::invalid_argument("build_schedule: need 0 < beta_0 <= beta_T < 1");
  }
  DiffusionSchedule s;
  s.T = T;
  s.beta.resize(T);
  s.alpha.resize(T);
  s.alpha_bar.resize(T);
  s.sigma.resize(T);
  double running = 1.0;
  for (int t = 0; t < T; ++t) {
    s.beta[t] = beta_0 + (beta_T - beta_0) * static_cast<double>(t) / (T - 1);
    s.alpha[t] = 1.0 - s.beta[t];
    running *= s.alpha[t];
    s.alpha_bar[t] = running;
    s.sigma[t] = std::sqrt((1.0 - running) / running);
  }
  return s;
}

DiffusionSchedule default_schedule() { return build_schedule(1000, 1e-4, 2e-2); }

OracleDenoiser::OracleDenoiser(levy::JumpLaw law, int d, int burn_in)
    : law_(law), identity_(fwd::make_identity(d)), burn_in_(burn_in) {}

Eigen::MatrixXd OracleDenoiser::draw(const Eigen::VectorXd& x_noisy, double sigma, int n_samples,
                                     RandomStream& rng) const {
  if (x_noisy.size() != identity_.d) {
    throw std::invalid_argument("OracleDenoiser: dimension mismatch");
  }
  const auto result = gibbs::run_posterior_chain(identity_, x_noisy, sigma, law_, burn_in_,
                                                 n_samples, x_noisy, rng.next_u64());
  return result.draws;
}

Eigen::MatrixXd oracle_denoise(const levy::Signal& x_t, int t, const DiffusionSchedule& schedule,
                               const levy::JumpLaw& law, int n_samples, RandomStream& rng,
                               int burn_in) {
  if (t < 1 || t > schedule.T) throw std::invalid_argument("oracle_denoise: t out of range");
  const OracleDenoiser denoiser(law, static_cast<int>(x_t.size()), burn_in);
  return denoiser.draw(x_t, schedule.sigma_at(t), n_samples, rng);
}

levy::Signal tweedie_score(const levy::Signal& x, int t, const DiffusionSchedule& schedule,
                           const levy::Signal& mmse) {
  const double abar = schedule.alpha_bar_at(t);
  return -(x - std::sqrt(abar) * mmse) / (1.0 - abar);
}

levy::Signal ddpm_prior_sample(const Denoiser& denoiser, const DiffusionSchedule& schedule, int d,
                               int denoiser_samples, RandomStream& rng) {
  Eigen::VectorXd x(d);
  for (int i = 0; i < d; ++i) x[i] = rng.normal();
  for (int t = schedule.T; t >= 1; --t) {
    const double abar = schedule.alpha_bar_at(t);
    const double beta = schedule.beta_at(t);
    // The denoising subproblem lives in x0-scale: y = x/sqrt(abar) with noise
    // level sigma_t.
    const Eigen::MatrixXd draws =
        denoiser.draw(x / std::sqrt(abar), schedule.sigma_at(t), denoiser_samples, rng);
    const Eigen::VectorXd mmse = draws.rowwise().mean();
    const Eigen::VectorXd score = tweedie_score(x, t, schedule, mmse);
    x = (x + beta * score) / std::sqrt(1.0 - beta);
    if (t > 1) {
      const double noise = std::sqrt(beta);
      for (int i = 0; i < d; ++i) x[i] += noise * rng.normal();
    }
  }
  return x;
}

Eigen::MatrixXd covariance_statistic(const Eigen::MatrixXd& draws) {
  if (draws.cols() < 2) throw std::invalid_argument("covariance_statistic: need at least 2 draws");
  const Eigen::VectorXd mean = draws.rowwise().mean();
  const Eigen::MatrixXd centered = draws.colwise() - mean;
  return (centered * centered.transpose()) / static_cast<double>(draws.cols() - 1);
}

Eigen::MatrixXd jacobian_from_covariance(const Eigen::MatrixXd& cov, int t,
                                         const DiffusionSchedule& schedule) {
  const double abar = schedule.alpha_bar_at(t);
  return (std::sqrt(abar) / (1.0 - abar)) * cov;
}

// ---------------------------------------------------------------------------
// Subprocess denoiser. One request/response pair per draw call over the
// child's stdin/stdout:
//   request : magic "DPSB" u32 | d u32 | S u32 | sigma f64 | x f64[d]
//   response: magic "DPSB" u32 | d u32 | S u32 | draws f64[S*d] (draw-major)
// All integers and floats little-endian.
// ---------------------------------------------------------------------------

struct SubprocessDenoiser::Impl {
  std::string command;
  FILE* to_child = nullptr;
  FILE* from_child = nullptr;
  std::mutex mutex;
};

namespace {

constexpr std::uint32_t kMagic = 0x42535044u;  // "DPSB"

void write_exact(FILE* f, const void* data, size_t n) {
  if (std::fwrite(data, 1, n, f) != n) {
    throw std::runtime_error("external denoiser: short write");
  }
}

void read_exact(FILE* f, void* data, size_t n) {
  if (std::fread(data, 1, n, f) != n) {
    throw std::runtime_error("external denoiser: short read (did the process exit?)");
  }
}

}  // namespace

SubprocessDenoiser::SubprocessDenoiser(std::string command) : impl_(new Impl) {
  impl_->command = std::move(command);
}

SubprocessDenoiser::~SubprocessDenoiser() {
  if (impl_->to_child) std::fclose(impl_->to_child);
  if (impl_->from_child) std::fclose(impl_->from_child);
}

Eigen::MatrixXd SubprocessDenoiser::draw(const Eigen::VectorXd& x_noisy, double sigma,
                                         int n_samples, RandomStream&) const {
  std::lock_guard<std::mutex> lock(impl_->mutex);
  if (!impl_->to_child) {
#if defined(_WIN32)
    throw std::runtime_error("external denoiser: unsupported platform");
#else
    // Child reads requests on stdin and writes responses on stdout.
    int to_fd[2];
    int from_fd[2];
    if (pipe(to_fd) != 0 || pipe(from_fd) != 0) {
      throw std::runtime_error("external denoiser: pipe failed");
    }
    const pid_t pid = fork();
    if (pid < 0) throw std::runtime_error("external denoiser: fork failed");
    if (pid == 0) {
      dup2(to_fd[0], 0);
      dup2(from_fd[1], 1);
      close(to_fd[0]);
      close(to_fd[1]);
      close(from_fd[0]);
      close(from_fd[1]);
      execl("/bin/sh", "sh", "-c", impl_->command.c_str(), static_cast<char*>(nullptr));
      _exit(127);
    }
    close(to_fd[0]);
    close(from_fd[1]);
    impl_->to_child = fdopen(to_fd[1], "wb");
    impl_->from_child = fdopen(from_fd[0], "rb");
#endif
  }

  const std::uint32_t d = static_cast<std::uint32_t>(x_noisy.size());
  const std::uint32_t s = static_cast<std::uint32_t>(n_samples);
  write_exact(impl_->to_child, &kMagic, sizeof(kMagic));
  write_exact(impl_->to_child, &d, sizeof(d));
  write_exact(impl_->to_child, &s, sizeof(s));
  write_exact(impl_->to_child, &sigma, sizeof(sigma));
  write_exact(impl_->to_child, x_noisy.data(), sizeof(double) * d);
  std::fflush(impl_->to_child);

  std::uint32_t magic = 0;
  std::uint32_t rd = 0;
  std::uint32_t rs = 0;
  read_exact(impl_->from_child, &magic, sizeof(magic));
  read_exact(impl_->from_child, &rd, sizeof(rd));
  read_exact(impl_->from_child, &rs, sizeof(rs));
  if (magic != kMagic || rd != d || rs != s) {
    throw std::runtime_error("external denoiser: malformed response header");
  }
  Eigen::MatrixXd draws(d, s);
  std::vector<double> buffer(d);
  for (std::uint32_t k = 0; k < s; ++k) {
    read_exact(impl_->from_child, buffer.data(), sizeof(double) * d);
    for (std::uint32_t i = 0; i < d; ++i) draws(i, k) = buffer[i];
  }
  for (Eigen::Index i = 0; i < draws.size(); ++i) {
    if (!std::isfinite(draws.data()[i])) {
      throw std::runtime_error("external denoiser: non-finite draw");
    }
  }
  return draws;
}

}  // namespace dpsb::diff
