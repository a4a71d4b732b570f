#include "dpsb/dps.hpp"

#include <chrono>
#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>

#include "dpsb/distributions.hpp"

namespace dpsb::dps {

std::string algorithm_name(const AlgorithmParams& params) {
  if (std::holds_alternative<CdpsParams>(params)) return "cdps";
  if (std::holds_alternative<DiffpirParams>(params)) return "diffpir";
  return "dpnp";
}

void DpsConfig::validate() const {
  if (n_samples < 1) throw std::invalid_argument("DpsConfig: n_samples must be >= 1");
  if (denoiser_samples < 1) throw std::invalid_argument("DpsConfig: denoiser_samples must be >= 1");
  std::visit(
      [](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, CdpsParams>) {
          if (!(p.zeta > 0.0)) throw std::invalid_argument("CdpsParams: zeta must be > 0");
        } else if constexpr (std::is_same_v<T, DiffpirParams>) {
          if (!(p.lambda > 0.0)) throw std::invalid_argument("DiffpirParams: lambda must be > 0");
          if (!(p.zeta > 0.0 && p.zeta <= 1.0)) {
            throw std::invalid_argument("DiffpirParams: zeta must be in (0, 1]");
          }
        } else {
          if (!(p.eta_final > 0.0)) throw std::invalid_argument("DpnpParams: eta_final must be > 0");
          if (!(p.eta_initial > 0.0)) {
            throw std::invalid_argument("DpnpParams: eta_initial must be > 0");
          }
          if (p.steps < 5 || p.steps % 5 != 0) {
            throw std::invalid_argument("DpnpParams: steps must be a positive multiple of 5");
          }
        }
      },
      params);
}

std::vector<double> dpnp_eta_schedule(const DpnpParams& params) {
  const int k = params.steps;
  const int hold = k / 5;
  std::vector<double> eta(k);
  for (int i = 1; i <= k; ++i) {
    if (i <= hold) {
      eta[i - 1] = params.eta_initial;
    } else {
      const double frac = static_cast<double>(i - hold) / static_cast<double>(k - hold);
      eta[i - 1] = params.eta_initial * std::pow(params.eta_final / params.eta_initial, frac);
    }
  }
  return eta;
}

std::vector<double> denoiser_noise_levels(const DpsConfig& config) {
  if (const auto* dpnp = std::get_if<DpnpParams>(&config.params)) {
    return dpnp_eta_schedule(*dpnp);
  }
  std::vector<double> sigmas(config.schedule.T);
  for (int t = config.schedule.T; t >= 1; --t) {
    sigmas[config.schedule.T - t] = config.schedule.sigma_at(t);
  }
  return sigmas;
}

levy::Signal cdps_step(const levy::Signal& x_t, const Eigen::MatrixXd& draws,
                       const Eigen::VectorXd& y, const fwd::ForwardModel& model,
                       const diff::DiffusionSchedule& schedule, double zeta, int t,
                       RandomStream& rng) {
  if (draws.cols() < 2) throw std::invalid_argument("cdps_step: need at least 2 denoising draws");
  const double abar_t = schedule.alpha_bar_at(t);
  const double abar_prev = schedule.alpha_bar_at(t - 1);
  const double alpha_t = schedule.alpha_at(t);
  const double beta_t = schedule.beta_at(t);

  const Eigen::VectorXd x0_hat = draws.rowwise().mean();
  const Eigen::MatrixXd cov = diff::covariance_statistic(draws);

  // Ancestral mean on the ambient iterate, then the covariance-based guidance,
  // then back to x0-scale.
  const Eigen::VectorXd x_ambient = std::sqrt(abar_t) * x_t;
  const double coef_x = std::sqrt(alpha_t) * (1.0 - abar_prev) / (1.0 - abar_t);
  const double coef_x0 = std::sqrt(abar_prev) * beta_t / (1.0 - abar_t);
  const double noise_sd = std::sqrt(beta_t * (1.0 - abar_prev) / (1.0 - abar_t));

  Eigen::VectorXd x_prev = coef_x * x_ambient + coef_x0 * x0_hat;
  for (Eigen::Index i = 0; i < x_prev.size(); ++i) x_prev[i] += noise_sd * rng.normal();

  // Residual-normalized guidance weight: zeta_t = zeta / ||A x0_hat - y||. A
  // constant weight is unusable (the covariance-scaled pull either diverges or
  // never fits); the normalization is what makes one scalar tunable on a
  // loglinear grid.
  const Eigen::VectorXd residual = fwd::apply_forward(model, x0_hat) - y;
  const double residual_norm = residual.norm();
  if (residual_norm > 0.0) {
    const Eigen::VectorXd guidance =
        (std::sqrt(abar_t) / (1.0 - abar_t)) *
        (cov.transpose() * fwd::apply_adjoint(model, residual));
    x_prev -= (zeta / residual_norm) * guidance;
  }
  return x_prev / std::sqrt(abar_prev);
}

levy::Signal diffpir_step(const levy::Signal& x_t, const Eigen::MatrixXd& draws,
                          const Eigen::VectorXd& y, const fwd::ForwardModel& model,
                          const diff::DiffusionSchedule& schedule, double lambda, double zeta,
                          int t, RandomStream& rng) {
  const double abar_t = schedule.alpha_bar_at(t);
  const double abar_prev = schedule.alpha_bar_at(t - 1);
  const double sigma_t2 = (1.0 - abar_t) / abar_t;
  const double rho = lambda * model.sigma_n * model.sigma_n / sigma_t2;
  if (!(rho > 0.0)) throw std::invalid_argument("diffpir_step: rho must be > 0");

  Eigen::VectorXd x0_hat = draws.rowwise().mean();

  // Data proximal step: argmin_x 0.5||Ax - y||^2 + rho/2 ||x - x0_hat||^2.
  if (model.kind == fwd::OperatorKind::Identity) {
    x0_hat = (y + rho * x0_hat) / (1.0 + rho);
  } else if (model.kind == fwd::OperatorKind::Imputation) {
    Eigen::VectorXd ata_diag = Eigen::VectorXd::Zero(model.d);
    for (int idx : model.kept_entries) ata_diag[idx] = 1.0;
    const Eigen::VectorXd rhs = fwd::apply_adjoint(model, y) + rho * x0_hat;
    x0_hat = rhs.array() / (ata_diag.array() + rho);
  } else {
    const Eigen::MatrixXd a = fwd::dense_matrix(model);
    Eigen::MatrixXd normal_matrix = a.transpose() * a;
    normal_matrix.diagonal().array() += rho;
    x0_hat = normal_matrix.llt().solve(a.transpose() * y + rho * x0_hat);
  }

  const Eigen::VectorXd x_ambient = std::sqrt(abar_t) * x_t;
  const Eigen::VectorXd eps_hat =
      (x_ambient - std::sqrt(abar_t) * x0_hat) / std::sqrt(1.0 - abar_t);

  Eigen::VectorXd noise(x_t.size());
  for (Eigen::Index i = 0; i < noise.size(); ++i) noise[i] = rng.normal();

  const Eigen::VectorXd x_prev = std::sqrt(abar_prev) * x0_hat +
                                 std::sqrt(1.0 - abar_prev) *
                                     (std::sqrt(1.0 - zeta) * eps_hat + std::sqrt(zeta) * noise);
  return x_prev / std::sqrt(abar_prev);
}

levy::Signal dpnp_step(const levy::Signal& x_t, const Eigen::MatrixXd& draws,
                       const Eigen::VectorXd& y, const fwd::ForwardModel& model, double eta_t,
                       double sigma_n, bool noise_weighted, RandomStream& rng) {
  (void)x_t;
  if (!(eta_t > 0.0)) throw std::invalid_argument("dpnp_step: eta must be > 0");
  const Eigen::VectorXd x0 = draws.col(0);
  const double data_weight = noise_weighted ? 1.0 / (sigma_n * sigma_n) : 1.0;
  const double prox_weight = 1.0 / (eta_t * eta_t);

  // Exact draw from the data-proximal conditional
  //   exp(-w/2 ||Ax - y||^2 - 1/(2 eta^2) ||x - x0||^2).
  const Eigen::MatrixXd a = fwd::dense_matrix(model);
  Eigen::MatrixXd precision = data_weight * (a.transpose() * a);
  precision.diagonal().array() += prox_weight;
  const Eigen::VectorXd shift = data_weight * (a.transpose() * y) + prox_weight * x0;
  return dist::PrecisionGaussian(std::move(precision), shift).sample(rng);
}

namespace {

AlgorithmRun builtin_run(const DpsConfig& config, const fwd::ForwardModel& model) {
  AlgorithmRun run;
  run.noise_levels = denoiser_noise_levels(config);
  const diff::DiffusionSchedule schedule = config.schedule;
  if (const auto* cdps = std::get_if<CdpsParams>(&config.params)) {
    const double zeta = cdps->zeta;
    run.step = [zeta, schedule](const levy::Signal& x, const Eigen::MatrixXd& draws,
                                const Eigen::VectorXd& y, const fwd::ForwardModel& m, int step_idx,
                                RandomStream& rng) {
      return cdps_step(x, draws, y, m, schedule, zeta, schedule.T - step_idx, rng);
    };
  } else if (const auto* dpir = std::get_if<DiffpirParams>(&config.params)) {
    const double lambda = dpir->lambda;
    const double zeta = dpir->zeta;
    run.step = [lambda, zeta, schedule](const levy::Signal& x, const Eigen::MatrixXd& draws,
                                        const Eigen::VectorXd& y, const fwd::ForwardModel& m,
                                        int step_idx, RandomStream& rng) {
      return diffpir_step(x, draws, y, m, schedule, lambda, zeta, schedule.T - step_idx, rng);
    };
  } else {
    const DpnpParams dpnp = std::get<DpnpParams>(config.params);
    const std::vector<double> eta = dpnp_eta_schedule(dpnp);
    run.denoiser_samples_per_step = 1;  // only the first draw is consumed
    run.step = [dpnp, eta, sigma = model.sigma_n](const levy::Signal& x,
                                                  const Eigen::MatrixXd& draws,
                                                  const Eigen::VectorXd& y,
                                                  const fwd::ForwardModel& m, int step_idx,
                                                  RandomStream& rng) {
      return dpnp_step(x, draws, y, m, eta[step_idx], sigma, dpnp.noise_weighted_prox, rng);
    };
  }
  return run;
}

}  // namespace

DpsRunResult run_dps(const DpsConfig& config, const Eigen::VectorXd& y,
                     const fwd::ForwardModel& model, const diff::Denoiser& denoiser,
                     std::uint64_t seed) {
  config.validate();
  if (y.size() != model.m) throw std::invalid_argument("run_dps: measurement length mismatch");
  const auto t_start = std::chrono::steady_clock::now();

  const AlgorithmRun run = builtin_run(config, model);
  const int n_steps = static_cast<int>(run.noise_levels.size());
  const int s_per_step =
      run.denoiser_samples_per_step > 0 ? run.denoiser_samples_per_step : config.denoiser_samples;
  const int d = model.d;

  DpsRunResult result;
  result.draws.resize(d, config.n_samples);
  if (config.keep_trajectories) result.trajectories.resize(config.n_samples);

  for (int k = 0; k < config.n_samples; ++k) {
    RandomStream rng = derive_stream(seed, "dps-trajectory", {static_cast<std::uint64_t>(k)});
    Eigen::VectorXd x(d);
    for (int i = 0; i < d; ++i) x[i] = rng.normal();
    Eigen::MatrixXd trajectory;
    if (config.keep_trajectories) {
      trajectory.resize(d, n_steps + 1);
      trajectory.col(0) = x;
    }
    for (int step = 0; step < n_steps; ++step) {
      const Eigen::MatrixXd draws = denoiser.draw(x, run.noise_levels[step], s_per_step, rng);
      x = run.step(x, draws, y, model, step, rng);
      if (!x.allFinite()) throw std::runtime_error("run_dps: non-finite iterate");
      if (config.keep_trajectories) trajectory.col(step + 1) = x;
    }
    result.draws.col(k) = x;
    if (config.keep_trajectories) result.trajectories[k] = std::move(trajectory);
  }

  result.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  return result;
}

// ---------------------------------------------------------------------------
// Registry
// ---------------------------------------------------------------------------

namespace {

std::map<std::string, AlgorithmFactory>& registry() {
  static std::map<std::string, AlgorithmFactory> reg;
  static std::once_flag init;
  std::call_once(init, [] {
    reg["cdps"] = [](const nlohmann::json& j, const diff::DiffusionSchedule& schedule,
                     const fwd::ForwardModel& model) {
      DpsConfig config{params_from_json("cdps", j), schedule};
      return builtin_run(config, model);
    };
    reg["diffpir"] = [](const nlohmann::json& j, const diff::DiffusionSchedule& schedule,
                        const fwd::ForwardModel& model) {
      DpsConfig config{params_from_json("diffpir", j), schedule};
      return builtin_run(config, model);
    };
    reg["dpnp"] = [](const nlohmann::json& j, const diff::DiffusionSchedule& schedule,
                     const fwd::ForwardModel& model) {
      DpsConfig config{params_from_json("dpnp", j), schedule};
      return builtin_run(config, model);
    };
  });
  return reg;
}

}  // namespace

void register_algorithm(const std::string& name, AlgorithmFactory factory) {
  registry()[name] = std::move(factory);
}

bool algorithm_registered(const std::string& name) { return registry().count(name) > 0; }

AlgorithmRun make_algorithm(const std::string& name, const nlohmann::json& params,
                            const diff::DiffusionSchedule& schedule,
                            const fwd::ForwardModel& model) {
  const auto it = registry().find(name);
  if (it == registry().end()) throw std::invalid_argument("unknown algorithm: " + name);
  return it->second(params, schedule, model);
}

std::vector<std::string> registered_algorithms() {
  std::vector<std::string> names;
  for (const auto& [name, factory] : registry()) names.push_back(name);
  return names;
}

AlgorithmParams params_from_json(const std::string& name, const nlohmann::json& j) {
  if (name == "cdps") {
    CdpsParams p;
    p.zeta = j.at("zeta").get<double>();
    return p;
  }
  if (name == "diffpir") {
    DiffpirParams p;
    p.lambda = j.at("lambda").get<double>();
    p.zeta = j.at("zeta").get<double>();
    return p;
  }
  if (name == "dpnp") {
    DpnpParams p;
    p.eta_initial = j.at("eta_initial").get<double>();
    if (j.contains("eta_final")) p.eta_final = j.at("eta_final").get<double>();
    if (j.contains("steps")) p.steps = j.at("steps").get<int>();
    if (j.contains("noise_weighted_prox")) {
      p.noise_weighted_prox = j.at("noise_weighted_prox").get<bool>();
    }
    return p;
  }
  throw std::invalid_argument("params_from_json: unknown algorithm: " + name);
}

nlohmann::json params_to_json(const AlgorithmParams& params) {
  nlohmann::json j;
  std::visit(
      [&j](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, CdpsParams>) {
          j["zeta"] = p.zeta;
        } else if constexpr (std::is_same_v<T, DiffpirParams>) {
          j["lambda"] = p.lambda;
          j["zeta"] = p.zeta;
        } else {
          j["eta_initial"] = p.eta_initial;
          j["eta_final"] = p.eta_final;
          j["steps"] = p.steps;
          j["noise_weighted_prox"] = p.noise_weighted_prox;
        }
      },
      params);
  return j;
}

}  // namespace dpsb::dps
