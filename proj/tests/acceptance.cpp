// Acceptance suite: one pass/fail line per criterion. Runs the full set by
// default; `--only N` (repeatable) restricts to the given criteria and
// `--list` shows what is available. Exit status is the number of failures.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <map>
#include <numbers>
#include <string>
#include <vector>

#include "dpsb/baselines.hpp"
#include "dpsb/diffusion.hpp"
#include "dpsb/dps.hpp"
#include "dpsb/evaluation.hpp"
#include "dpsb/gibbs.hpp"
#include "dpsb/harness/config.hpp"
#include "support/oracles.hpp"

using namespace dpsb;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

constexpr std::uint64_t kSeed = 0x5eedau;
constexpr double kSnrDb = 25.0;
constexpr int kDim = 64;

double calibrated_sigma(const fwd::ForwardModel& model, const levy::JumpLaw& law,
                        std::uint64_t seed, int n_signals = 200) {
  RandomStream rng(seed);
  std::vector<levy::Signal> signals;
  signals.reserve(n_signals);
  for (int i = 0; i < n_signals; ++i) {
    signals.push_back(levy::synthesize_signal(law, model.d, rng));
  }
  return fwd::calibrate_noise(model, signals, kSnrDb);
}

// The acceptance schedule for the sampler-ordering and calibration criteria:
// 100 reverse steps with the endpoints scaled to keep the terminal noise of
// the 1000-step schedule.
diff::DiffusionSchedule dps_schedule() { return diff::build_schedule(100, 1e-3, 0.2); }

// ---------------------------------------------------------------------------
// 1. Conjugate-oracle equivalence on all four operators.
// ---------------------------------------------------------------------------
Outcome criterion_1() {
  const double var_u = 0.25;
  double worst_mean = 0.0;
  double worst_var = 0.0;
  for (const auto kind : {fwd::OperatorKind::Identity, fwd::OperatorKind::Convolution,
                          fwd::OperatorKind::Imputation, fwd::OperatorKind::PartialFourier}) {
    RandomStream op_rng = derive_stream(kSeed, "c1-operator", {static_cast<std::uint64_t>(kind)});
    fwd::ForwardModel model = fwd::build_operator(kind, kDim, op_rng);
    model.sigma_n = calibrated_sigma(model, levy::GaussJumps(var_u),
                                     derive_seed(kSeed, "c1-cal", {static_cast<std::uint64_t>(kind)}));

    RandomStream data_rng = derive_stream(kSeed, "c1-data", {static_cast<std::uint64_t>(kind)});
    const levy::Signal truth = levy::synthesize_signal(levy::GaussJumps(var_u), kDim, data_rng);
    const Eigen::VectorXd y = fwd::synthesize_measurement(model, truth, data_rng).y;

    const auto posterior = oracle::conjugate_posterior(fwd::dense_matrix(model), y,
                                                       model.sigma_n * model.sigma_n, var_u);
    const gibbs::GlmProblem problem(model, y, model.sigma_n, levy::GaussJumps(var_u));
    const auto chain = gibbs::run_glm_chain(problem, 2000, 20000, base::solve_l2(y, model, 1.0),
                                            derive_seed(kSeed, "c1-chain",
                                                        {static_cast<std::uint64_t>(kind)}));
    const auto stats = gibbs::chain_statistics(chain);

    worst_mean = std::max(worst_mean, (stats.mean - posterior.mean).norm() / posterior.mean.norm());
    for (int k = 0; k < kDim; ++k) {
      worst_var = std::max(worst_var, std::fabs(stats.marginal_var[k] - posterior.covariance(k, k)) /
                                          posterior.covariance(k, k));
    }
  }
  char buf[160];
  std::snprintf(buf, sizeof(buf), "max rel mean err %.2e (tol 1e-2), max var err %.1f%% (tol 5%%)",
                worst_mean, 100.0 * worst_var);
  return {worst_mean <= 1e-2 && worst_var <= 0.05, buf};
}

// ---------------------------------------------------------------------------
// 2. Tuned l2 on gaussian denoising sits at a zero gap.
// ---------------------------------------------------------------------------
Outcome criterion_2() {
  const double var_u = 0.25;
  const levy::JumpLaw law = levy::GaussJumps(var_u);
  fwd::ForwardModel model = fwd::make_identity(kDim);
  model.sigma_n = calibrated_sigma(model, law, derive_seed(kSeed, "c2-cal"));

  RandomStream rng = derive_stream(kSeed, "c2-data");
  std::vector<base::ValidationItem> val;
  for (int i = 0; i < 100; ++i) {
    const levy::Signal x = levy::synthesize_signal(law, kDim, rng);
    val.push_back({fwd::synthesize_measurement(model, x, rng).y, x});
  }
  const auto estimator = [&](const Eigen::VectorXd& y, double lambda) {
    return base::solve_l2(y, model, lambda);
  };
  const double lambda =
      base::tune_lambda(estimator, val, base::TuningGrid::loglinear(-5.0, 5.0, 1000));

  double gap_sum = 0.0;
  for (int i = 0; i < 100; ++i) {
    const levy::Signal truth = levy::synthesize_signal(law, kDim, rng);
    const Eigen::VectorXd y = fwd::synthesize_measurement(model, truth, rng).y;
    const gibbs::GlmProblem problem(model, y, model.sigma_n, law);
    const auto chain =
        gibbs::run_glm_chain(problem, 2000, 20000, base::solve_l2(y, model, 1.0),
                             derive_seed(kSeed, "c2-gold", {static_cast<std::uint64_t>(i)}));
    const levy::Signal gold = chain.draws.rowwise().mean();
    gap_sum += eval::mmse_gap_db(base::solve_l2(y, model, lambda), gold, truth);
  }
  const double mean_gap = gap_sum / 100.0;
  char buf[120];
  std::snprintf(buf, sizeof(buf), "mean gap %.4f dB over 100 items (tol 0.1), lambda* %.4g",
                mean_gap, lambda);
  return {mean_gap <= 0.1, buf};
}

// ---------------------------------------------------------------------------
// 3. Gold-standard coverage calibration.
// ---------------------------------------------------------------------------
Outcome criterion_3() {
  const int n_items = 200;
  const int n_samples = 200;
  std::string detail;
  bool pass = true;
  int cell_idx = 0;
  for (const auto kind : {fwd::OperatorKind::Identity, fwd::OperatorKind::Imputation}) {
    for (const levy::JumpLaw& law :
         {levy::JumpLaw(levy::GaussJumps(0.25)), levy::JumpLaw(levy::LaplaceJumps(1.0))}) {
      RandomStream op_rng = derive_stream(kSeed, "c3-operator", {static_cast<std::uint64_t>(kind)});
      fwd::ForwardModel model = fwd::build_operator(kind, kDim, op_rng);
      model.sigma_n = calibrated_sigma(model, law,
                                       derive_seed(kSeed, "c3-calibration",
                                                   {static_cast<std::uint64_t>(cell_idx)}));

      std::vector<Eigen::MatrixXd> samples(n_items);
      std::vector<levy::Signal> truths(n_items);
      std::vector<Eigen::VectorXd> data(n_items);
      RandomStream rng = derive_stream(kSeed, "c3-measurements", {static_cast<std::uint64_t>(cell_idx)});
      for (int i = 0; i < n_items; ++i) {
        truths[i] = levy::synthesize_signal(law, kDim, rng);
        data[i] = fwd::synthesize_measurement(model, truths[i], rng).y;
        const auto chain = gibbs::run_posterior_chain(
            model, data[i], model.sigma_n, law, 200, n_samples,
            base::solve_l2(data[i], model, 1.0),
            derive_seed(kSeed, "c3-chains",
                        {static_cast<std::uint64_t>(cell_idx), static_cast<std::uint64_t>(i)}),
            /*thin=*/5);
        samples[i] = chain.draws;
      }
      const auto log_post = [&](int item, const levy::Signal& x) {
        return eval::log_posterior(model, data[item], model.sigma_n, law, x);
      };
      const auto record = eval::hpd_coverage(samples, truths, log_post, 0.9);
      const bool ok = record.coverage >= 0.86 && record.coverage <= 0.94;
      pass = pass && ok;
      char buf[96];
      std::snprintf(buf, sizeof(buf), "%s%s/%s %.3f", cell_idx ? ", " : "",
                    fwd::kind_name(kind).c_str(), levy::law_name(law).c_str(), record.coverage);
      detail += buf;
      ++cell_idx;
    }
  }
  return {pass, "coverage in [0.86, 0.94]: " + detail};
}

// ---------------------------------------------------------------------------
// 4. Rank-one update consistency over long flip sequences.
// ---------------------------------------------------------------------------
Outcome criterion_4() {
  const int d = 16;
  double worst = 0.0;
  for (int sequence = 0; sequence < 1000; ++sequence) {
    RandomStream rng = derive_stream(kSeed, "c4", {static_cast<std::uint64_t>(sequence)});
    fwd::ForwardModel model = fwd::make_imputation(d, rng, 0.8);
    if (model.m == 0) continue;
    Eigen::VectorXd y(model.m);
    for (int i = 0; i < model.m; ++i) y[i] = rng.normal();
    gibbs::BlConditional state(gibbs::integrated_operator(model), y, 0.4, 0.15, 1.0);
    Eigen::VectorXd w(d);
    std::vector<std::uint8_t> v(d);
    for (int k = 0; k < d; ++k) {
      w[k] = rng.exponential(0.5);
      v[k] = rng.uniform() < 0.4 ? 1 : 0;
    }
    state.set_latents(w, v);
    for (int flip = 0; flip < 24; ++flip) {
      const int k = static_cast<int>(rng.next_u64() % d);
      state.set_bit(k, !state.bit(k));
      const double scale_det = std::max(std::fabs(state.dense_log_det_b()), 1.0);
      const double scale_quad = std::max(std::fabs(state.dense_quad_form()), 1.0);
      worst = std::max(worst, std::fabs(state.log_det_b() - state.dense_log_det_b()) / scale_det);
      worst = std::max(worst, std::fabs(state.quad_form() - state.dense_quad_form()) / scale_quad);
    }
  }
  char buf[96];
  std::snprintf(buf, sizeof(buf), "max rel drift %.2e over 1000 flip sequences (tol 1e-8)", worst);
  return {worst <= 1e-8, buf};
}

// ---------------------------------------------------------------------------
// 5. Oracle reverse diffusion reproduces the jump law.
// ---------------------------------------------------------------------------
Outcome criterion_5() {
  // 200-step profile with matched terminal noise; threshold 0.08.
  const auto schedule = diff::build_schedule(200, 5e-4, 0.1);
  const levy::JumpLaw law = levy::LaplaceJumps(1.0);
  const diff::OracleDenoiser denoiser(law, kDim, 100);
  const int n_signals = 2000;

  std::vector<double> jumps;
  jumps.reserve(static_cast<std::size_t>(n_signals) * kDim);
  for (int i = 0; i < n_signals; ++i) {
    RandomStream rng = derive_stream(kSeed, "c5", {static_cast<std::uint64_t>(i)});
    const levy::Signal x = diff::ddpm_prior_sample(denoiser, schedule, kDim, 300, rng);
    const Eigen::VectorXd u = levy::apply_difference(x);
    for (int k = 0; k < kDim; ++k) jumps.push_back(u[k]);
  }
  const double ks =
      eval::ks_distance(jumps, [](double x) { return oracle::laplace_cdf(x, 1.0); });
  char buf[96];
  std::snprintf(buf, sizeof(buf), "pooled jump KS %.4f vs laplace(1) at T = 200 (tol 0.08)", ks);
  return {ks <= 0.08, buf};
}

// ---------------------------------------------------------------------------
// 6. Sampler ordering on the spike-and-slab denoising problem.
// ---------------------------------------------------------------------------
Outcome criterion_6() {
  const levy::JumpLaw law = levy::BernoulliLaplaceJumps(0.1, 1.0);
  fwd::ForwardModel model = fwd::make_identity(kDim);
  model.sigma_n = calibrated_sigma(model, law, derive_seed(kSeed, "c6-cal"));
  const auto schedule = dps_schedule();
  const diff::OracleDenoiser denoiser(law, kDim, 100);
  const int n_items = 50;
  const int n_samples = 4;

  // Tuned l2 baseline.
  RandomStream val_rng = derive_stream(kSeed, "c6-val");
  std::vector<base::ValidationItem> val;
  for (int i = 0; i < 50; ++i) {
    const levy::Signal x = levy::synthesize_signal(law, kDim, val_rng);
    val.push_back({fwd::synthesize_measurement(model, x, val_rng).y, x});
  }
  const auto estimator = [&](const Eigen::VectorXd& y, double lambda) {
    return base::solve_l2(y, model, lambda);
  };
  const double lambda =
      base::tune_lambda(estimator, val, base::TuningGrid::loglinear(-5.0, 5.0, 1000));

  RandomStream rng = derive_stream(kSeed, "c6-data");
  std::vector<levy::Signal> truths(n_items);
  std::vector<Eigen::VectorXd> data(n_items);
  std::vector<levy::Signal> gold(n_items);
  for (int i = 0; i < n_items; ++i) {
    truths[i] = levy::synthesize_signal(law, kDim, rng);
    data[i] = fwd::synthesize_measurement(model, truths[i], rng).y;
    const auto chain = gibbs::run_posterior_chain(
        model, data[i], model.sigma_n, law, 5000, 20000, base::solve_l2(data[i], model, 1.0),
        derive_seed(kSeed, "c6-gold", {static_cast<std::uint64_t>(i)}));
    gold[i] = chain.draws.rowwise().mean();
  }

  double l2_gap = 0.0;
  for (int i = 0; i < n_items; ++i) {
    l2_gap += eval::mmse_gap_db(base::solve_l2(data[i], model, lambda), gold[i], truths[i]);
  }
  l2_gap /= n_items;

  std::string detail;
  char buf[96];
  std::snprintf(buf, sizeof(buf), "l2 %.2f dB;", l2_gap);
  detail += buf;

  bool pass = true;
  for (const std::string alg : {"cdps", "diffpir", "dpnp"}) {
    dps::DpsConfig config{bench::default_dps_parameters(alg, fwd::OperatorKind::Identity, law),
                          schedule, 300, n_samples};
    double gap = 0.0;
    for (int i = 0; i < n_items; ++i) {
      const auto run = dps::run_dps(config, data[i], model, denoiser,
                                    derive_seed(kSeed, "c6-run",
                                                {std::hash<std::string>{}(alg),
                                                 static_cast<std::uint64_t>(i)}));
      const levy::Signal mmse = run.draws.rowwise().mean();
      gap += eval::mmse_gap_db(mmse, gold[i], truths[i]);
    }
    gap /= n_items;
    pass = pass && (gap <= l2_gap - 3.0);
    std::snprintf(buf, sizeof(buf), " %s %.2f dB;", alg.c_str(), gap);
    detail += buf;
  }
  std::snprintf(buf, sizeof(buf), " require each <= l2 - 3.0 = %.2f dB", l2_gap - 3.0);
  detail += buf;
  return {pass, detail};
}

// ---------------------------------------------------------------------------
// 7. Guided samplers are overconfident while the gold standard stays
//    calibrated.
// ---------------------------------------------------------------------------
Outcome criterion_7() {
  const double var_u = 0.25;
  const levy::JumpLaw law = levy::GaussJumps(var_u);
  fwd::ForwardModel model = fwd::make_identity(kDim);
  model.sigma_n = calibrated_sigma(model, law, derive_seed(kSeed, "c7-cal"));
  const auto schedule = dps_schedule();
  const diff::OracleDenoiser denoiser(law, kDim, 100);

  const int n_items_gibbs = 200;
  const int n_items_dps = 50;
  const int n_samples_dps = 25;

  RandomStream rng = derive_stream(kSeed, "c7-data");
  std::vector<levy::Signal> truths(n_items_gibbs);
  std::vector<Eigen::VectorXd> data(n_items_gibbs);
  for (int i = 0; i < n_items_gibbs; ++i) {
    truths[i] = levy::synthesize_signal(law, kDim, rng);
    data[i] = fwd::synthesize_measurement(model, truths[i], rng).y;
  }
  const auto log_post = [&](int item, const levy::Signal& x) {
    return eval::log_posterior(model, data[item], model.sigma_n, law, x);
  };

  std::vector<Eigen::MatrixXd> gibbs_samples(n_items_gibbs);
  for (int i = 0; i < n_items_gibbs; ++i) {
    gibbs_samples[i] = gibbs::run_posterior_chain(
                           model, data[i], model.sigma_n, law, 200, 200,
                           base::solve_l2(data[i], model, 1.0),
                           derive_seed(kSeed, "c7-chain", {static_cast<std::uint64_t>(i)}),
                           /*thin=*/5)
                           .draws;
  }
  const double gibbs_cov =
      eval::hpd_coverage(gibbs_samples, truths, log_post, 0.9).coverage;

  std::map<std::string, double> dps_cov;
  for (const std::string alg : {"cdps", "diffpir"}) {
    dps::DpsConfig config{bench::default_dps_parameters(alg, fwd::OperatorKind::Identity, law),
                          schedule, 300, n_samples_dps};
    std::vector<Eigen::MatrixXd> samples(n_items_dps);
    std::vector<levy::Signal> sub_truths(truths.begin(), truths.begin() + n_items_dps);
    for (int i = 0; i < n_items_dps; ++i) {
      samples[i] = dps::run_dps(config, data[i], model, denoiser,
                                derive_seed(kSeed, "c7-run",
                                            {std::hash<std::string>{}(alg),
                                             static_cast<std::uint64_t>(i)}))
                       .draws;
    }
    dps_cov[alg] = eval::hpd_coverage(samples, sub_truths, log_post, 0.9).coverage;
  }

  const bool pass =
      gibbs_cov >= 0.86 && dps_cov["cdps"] <= 0.10 && dps_cov["diffpir"] <= 0.10;
  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "coverage at 0.9: gibbs %.3f (>= 0.86), cdps %.3f, diffpir %.3f (each <= 0.10)",
                gibbs_cov, dps_cov["cdps"], dps_cov["diffpir"]);
  return {pass, buf};
}

// ---------------------------------------------------------------------------
// 8. Chain-length protocols.
// ---------------------------------------------------------------------------
Outcome criterion_8() {
  const levy::JumpLaw law = levy::StudentJumps(1.0);
  fwd::ForwardModel identity = fwd::make_identity(kDim);
  const double sigma = calibrated_sigma(identity, law, derive_seed(kSeed, "c8-cal"));

  const auto trace = eval::burn_in_diagnostic(law, sigma, 200, 500, 10, 800, kDim,
                                              derive_seed(kSeed, "c8-burnin"));
  const auto count = eval::sample_count_diagnostic(law, sigma, 200, 500, 1e-2, kDim,
                                                   derive_seed(kSeed, "c8-count"));
  const bool pass = trace.iterations_to_plateau <= 50 && count.reached && count.window <= 400;
  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "burn-in plateau after %d iterations (tol 50); window %d at tol 1e-2 (max 400)",
                trace.iterations_to_plateau, count.window);
  return {pass, buf};
}

// ---------------------------------------------------------------------------
// 9. Identity suite.
// ---------------------------------------------------------------------------
Outcome criterion_9() {
  std::string detail;
  bool pass = true;

  {  // Tweedie exactness on a standard normal prior at every step.
    const auto schedule = diff::default_schedule();
    double worst = 0.0;
    RandomStream rng = derive_stream(kSeed, "c9-tweedie");
    for (int t = 1; t <= schedule.T; t += 37) {
      Eigen::VectorXd x(4);
      for (int i = 0; i < 4; ++i) x[i] = rng.normal();
      const Eigen::VectorXd mmse = std::sqrt(schedule.alpha_bar_at(t)) * x;
      worst = std::max(worst,
                       (diff::tweedie_score(x, t, schedule, mmse) + x).cwiseAbs().maxCoeff());
    }
    pass = pass && worst <= 1e-10;
    char buf[64];
    std::snprintf(buf, sizeof(buf), "tweedie err %.1e;", worst);
    detail += buf;
  }

  {  // Adjoint identities.
    double worst = 0.0;
    RandomStream rng = derive_stream(kSeed, "c9-adjoint");
    for (const auto kind : {fwd::OperatorKind::Identity, fwd::OperatorKind::Convolution,
                            fwd::OperatorKind::Imputation, fwd::OperatorKind::PartialFourier}) {
      const fwd::ForwardModel model = fwd::build_operator(kind, kDim, rng);
      Eigen::VectorXd x(model.d);
      Eigen::VectorXd v(model.m);
      for (int i = 0; i < model.d; ++i) x[i] = rng.normal();
      for (int i = 0; i < model.m; ++i) v[i] = rng.normal();
      const double lhs = fwd::apply_forward(model, x).dot(v);
      const double rhs = x.dot(fwd::apply_adjoint(model, v));
      worst = std::max(worst, std::fabs(lhs - rhs) / std::max(std::fabs(lhs), 1e-30));
    }
    pass = pass && worst <= 1e-10;
    char buf[64];
    std::snprintf(buf, sizeof(buf), " adjoint err %.1e;", worst);
    detail += buf;
  }

  {  // Covariance-based jacobian vs finite differences on the 4-dim toy.
    const int d = 4;
    const double var_u = 0.3;
    const auto schedule = diff::build_schedule(100, 1e-3, 0.1);
    const int t = 50;
    const double abar = schedule.alpha_bar_at(t);
    RandomStream rng = derive_stream(kSeed, "c9-jacobian");
    Eigen::VectorXd x(d);
    for (int i = 0; i < d; ++i) x[i] = rng.normal();
    const Eigen::MatrixXd draws =
        diff::oracle_denoise(x, t, schedule, levy::GaussJumps(var_u), 10000, rng);
    const Eigen::MatrixXd jac =
        diff::jacobian_from_covariance(diff::covariance_statistic(draws), t, schedule);

    Eigen::MatrixXd cov0(d, d);
    for (int i = 0; i < d; ++i) {
      for (int j = 0; j < d; ++j) cov0(i, j) = var_u * (std::min(i, j) + 1);
    }
    const Eigen::MatrixXd gain =
        std::sqrt(abar) * cov0 *
        (abar * cov0 + (1.0 - abar) * Eigen::MatrixXd::Identity(d, d)).inverse();
    const Eigen::VectorXd x_ambient = std::sqrt(abar) * x;
    Eigen::MatrixXd fd(d, d);
    const double h = 1e-3;
    for (int j = 0; j < d; ++j) {
      Eigen::VectorXd plus = x_ambient;
      Eigen::VectorXd minus = x_ambient;
      plus[j] += h;
      minus[j] -= h;
      fd.col(j) = gain * (plus - minus) / (2.0 * h);
    }
    const double err = (jac - fd).norm() / fd.norm();
    pass = pass && err <= 0.05;
    char buf[64];
    std::snprintf(buf, sizeof(buf), " jacobian err %.3f;", err);
    detail += buf;
  }

  {  // Generalized-lasso solver against a lattice scan at d = 3.
    fwd::ForwardModel identity = fwd::make_identity(3);
    Eigen::VectorXd y(3);
    y << 1.2, -0.4, 0.8;
    const double lambda = 0.5;
    const levy::Signal x = base::solve_l1(y, identity, lambda, 1e-10);
    const auto objective = [&](const Eigen::Vector3d& v) {
      return 0.5 * (Eigen::VectorXd(v) - y).squaredNorm() +
             lambda * levy::apply_difference(v).cwiseAbs().sum();
    };
    Eigen::Vector3d best = Eigen::Vector3d::Zero();
    double best_val = objective(best);
    Eigen::Vector3d center = best;
    double radius = 2.0;
    for (int level = 0; level < 6; ++level) {
      for (int i = -10; i <= 10; ++i) {
        for (int j = -10; j <= 10; ++j) {
          for (int k = -10; k <= 10; ++k) {
            const Eigen::Vector3d cand = center + radius / 10.0 * Eigen::Vector3d(i, j, k);
            const double val = objective(cand);
            if (val < best_val) {
              best_val = val;
              best = cand;
            }
          }
        }
      }
      center = best;
      radius /= 10.0;
    }
    const double err = (Eigen::Vector3d(x) - best).cwiseAbs().maxCoeff();
    pass = pass && err <= 1e-3;
    char buf[64];
    std::snprintf(buf, sizeof(buf), " lasso err %.1e;", err);
    detail += buf;
  }

  {  // Wilcoxon null p-values are uniform.
    RandomStream rng = derive_stream(kSeed, "c9-wilcoxon");
    std::vector<double> pvals;
    for (int sim = 0; sim < 1000; ++sim) {
      std::vector<double> diffs;
      for (int i = 0; i < 50; ++i) diffs.push_back(rng.normal());
      pvals.push_back(eval::wilcoxon_signed_rank(diffs).p_two_sided);
    }
    const double ks =
        eval::ks_distance(pvals, [](double x) { return std::clamp(x, 0.0, 1.0); });
    pass = pass && ks <= 0.06;
    char buf[64];
    std::snprintf(buf, sizeof(buf), " wilcoxon null KS %.3f", ks);
    detail += buf;
  }
  return {pass, detail};
}

}  // namespace

int main(int argc, char** argv) {
  const std::map<int, std::pair<const char*, std::function<Outcome()>>> criteria{
      {1, {"conjugate-oracle equivalence (all operators)", criterion_1}},
      {2, {"tuned l2 gap on gaussian denoising", criterion_2}},
      {3, {"gold-standard coverage calibration", criterion_3}},
      {4, {"rank-one update consistency", criterion_4}},
      {5, {"oracle reverse-diffusion exactness", criterion_5}},
      {6, {"sampler ordering on spike-and-slab denoising", criterion_6}},
      {7, {"guided-sampler miscalibration vs gold standard", criterion_7}},
      {8, {"burn-in and sample-count protocols", criterion_8}},
      {9, {"identity suite", criterion_9}},
  };

  std::vector<int> selected;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--list") == 0) {
      for (const auto& [id, entry] : criteria) std::printf("%d: %s\n", id, entry.first);
      return 0;
    }
    if (std::strcmp(argv[i], "--only") == 0 && i + 1 < argc) {
      selected.push_back(std::atoi(argv[++i]));
    }
  }
  if (selected.empty()) {
    for (const auto& [id, entry] : criteria) selected.push_back(id);
  }

  int failures = 0;
  for (const int id : selected) {
    const auto it = criteria.find(id);
    if (it == criteria.end()) {
      std::printf("unknown criterion %d\n", id);
      ++failures;
      continue;
    }
    const auto start = std::chrono::steady_clock::now();
    const Outcome outcome = it->second.second();
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("[%s] criterion %d: %s — %s (%.1fs)\n", outcome.pass ? "PASS" : "FAIL", id,
                it->second.first, outcome.detail.c_str(), seconds);
    std::fflush(stdout);
    if (!outcome.pass) ++failures;
  }
  return failures;
}
