#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <string>
#include <variant>
#include <vector>

#include "dpsb/diffusion.hpp"
#include "dpsb/forward_models.hpp"
#include "dpsb/rng.hpp"

#include <json.hpp>

namespace dpsb::dps {

// Per-algorithm parameters. The step functions never see the jump law: prior
// information reaches them only through the denoising draws.
struct CdpsParams {
  double zeta = 1.0;  // guidance weight, > 0
};

struct DiffpirParams {
  double lambda = 1.0;  // data-proximal strength, > 0
  double zeta = 0.3;    // fresh-noise fraction, in (0, 1]
};

struct DpnpParams {
  double eta_initial = 10.0;
  double eta_final = 0.15;
  int steps = 40;                  // K, divisible by 5
  bool noise_weighted_prox = true; // weight the data term by 1/sigma_n^2
};

using AlgorithmParams = std::variant<CdpsParams, DiffpirParams, DpnpParams>;

std::string algorithm_name(const AlgorithmParams& params);

struct DpsConfig {
  AlgorithmParams params;
  diff::DiffusionSchedule schedule;  // drives C-DPS / DiffPIR; DPnP uses its eta schedule
  int denoiser_samples = 300;
  int n_samples = 1;
  bool keep_trajectories = false;

  void validate() const;
};

// Annealing noise levels seen by the denoiser, first step first. For C-DPS and
// DiffPIR this is sigma_T..sigma_1; for DPnP the eta schedule of length K.
std::vector<double> denoiser_noise_levels(const DpsConfig& config);
std::vector<double> dpnp_eta_schedule(const DpnpParams& params);

// One reverse step each, iterates in x0-scale. `draws` are the denoising
// posterior samples at the current iterate.
levy::Signal cdps_step(const levy::Signal& x_t, const Eigen::MatrixXd& draws,
                       const Eigen::VectorXd& y, const fwd::ForwardModel& model,
                       const diff::DiffusionSchedule& schedule, double zeta, int t,
                       RandomStream& rng);

levy::Signal diffpir_step(const levy::Signal& x_t, const Eigen::MatrixXd& draws,
                          const Eigen::VectorXd& y, const fwd::ForwardModel& model,
                          const diff::DiffusionSchedule& schedule, double lambda, double zeta,
                          int t, RandomStream& rng);

levy::Signal dpnp_step(const levy::Signal& x_t, const Eigen::MatrixXd& draws,
                       const Eigen::VectorXd& y, const fwd::ForwardModel& model, double eta_t,
                       double sigma_n, bool noise_weighted, RandomStream& rng);

struct DpsRunResult {
  Eigen::MatrixXd draws;  // d x n_samples
  std::vector<Eigen::MatrixXd> trajectories;
  double seconds = 0.0;
};

DpsRunResult run_dps(const DpsConfig& config, const Eigen::VectorXd& y,
                     const fwd::ForwardModel& model, const diff::Denoiser& denoiser,
                     std::uint64_t seed);

// Plug-in surface: an algorithm is a noise-level schedule plus a step
// function (x_t, draws, y, model, step_index, rng) -> x_{t-1}.
struct AlgorithmRun {
  std::vector<double> noise_levels;
  int denoiser_samples_per_step = 0;  // 0 = use config value
  std::function<levy::Signal(const levy::Signal&, const Eigen::MatrixXd&, const Eigen::VectorXd&,
                             const fwd::ForwardModel&, int, RandomStream&)>
      step;
};

using AlgorithmFactory =
    std::function<AlgorithmRun(const nlohmann::json& params, const diff::DiffusionSchedule&,
                               const fwd::ForwardModel&)>;

void register_algorithm(const std::string& name, AlgorithmFactory factory);
bool algorithm_registered(const std::string& name);
AlgorithmRun make_algorithm(const std::string& name, const nlohmann::json& params,
                            const diff::DiffusionSchedule& schedule,
                            const fwd::ForwardModel& model);
std::vector<std::string> registered_algorithms();

AlgorithmParams params_from_json(const std::string& name, const nlohmann::json& j);
nlohmann::json params_to_json(const AlgorithmParams& params);

}  // namespace dpsb::dps
