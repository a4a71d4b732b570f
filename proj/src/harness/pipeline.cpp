#include "dpsb/harness/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <atomic>
#include <limits>
#include <iostream>
#include <map>

#include "dpsb/baselines.hpp"
#include "dpsb/evaluation.hpp"
#include "dpsb/gibbs.hpp"
#include "dpsb/harness/parallel.hpp"

namespace dpsb::bench {

namespace {

std::uint64_t op_index(fwd::OperatorKind kind) { return static_cast<std::uint64_t>(kind); }

std::string cell_slug(fwd::OperatorKind op, const levy::JumpLaw& law) {
  return fwd::kind_name(op) + "_" + law_slug(law);
}

Eigen::MatrixXd read_item_file(const std::filesystem::path& path, int rows, int cols) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::vector<double> buffer(static_cast<std::size_t>(rows) * cols);
  in.read(reinterpret_cast<char*>(buffer.data()),
          static_cast<std::streamsize>(buffer.size() * sizeof(double)));
  if (!in) throw std::runtime_error("short read from " + path.string());
  Eigen::MatrixXd out(rows, cols);
  std::size_t idx = 0;
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) out(r, c) = buffer[idx++];
  }
  return out;
}

void write_item_file(const std::filesystem::path& path, const Eigen::MatrixXd& array) {
  std::vector<double> buffer(static_cast<std::size_t>(array.size()));
  std::size_t idx = 0;
  for (Eigen::Index r = 0; r < array.rows(); ++r) {
    for (Eigen::Index c = 0; c < array.cols(); ++c) buffer[idx++] = array(r, c);
  }
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out.write(reinterpret_cast<const char*>(buffer.data()),
              static_cast<std::streamsize>(buffer.size() * sizeof(double)));
  }
  std::filesystem::rename(tmp, path);
}

bool item_file_complete(const std::filesystem::path& path, int rows, int cols) {
  std::error_code ec;
  const auto size = std::filesystem::file_size(path, ec);
  return !ec && size == static_cast<std::uintmax_t>(rows) * cols * sizeof(double);
}

}  // namespace

std::string CellKey::slug() const { return cell_slug(op, law); }

Pipeline::Pipeline(BenchmarkConfig config) : config_(std::move(config)) { config_.validate(); }

std::filesystem::path Pipeline::dataset_dir() const {
  return std::filesystem::path(config_.output_dir) / "dataset";
}
std::filesystem::path Pipeline::runs_dir() const {
  return std::filesystem::path(config_.output_dir) / "runs";
}
std::filesystem::path Pipeline::tuning_dir() const {
  return std::filesystem::path(config_.output_dir) / "tuning";
}
std::filesystem::path Pipeline::reports_dir() const {
  return std::filesystem::path(config_.output_dir) / "reports";
}

fwd::ForwardModel Pipeline::cell_model(const ArrayStore& store, const CellKey& key) const {
  const auto& meta = store.extra();
  fwd::ForwardModel model;
  bool found = false;
  for (const auto& op_json : meta.at("operators")) {
    if (op_json.at("kind").get<std::string>() == fwd::kind_name(key.op)) {
      model = fwd::model_from_json(op_json);
      found = true;
      break;
    }
  }
  if (!found) throw std::runtime_error("cell_model: operator missing from manifest");
  model.sigma_n =
      meta.at("sigma_n").at(fwd::kind_name(key.op)).at(levy::law_name(key.law)).get<double>();
  return model;
}

std::unique_ptr<diff::Denoiser> Pipeline::make_denoiser(const levy::JumpLaw& law) const {
  if (config_.denoiser == "oracle") {
    return std::make_unique<diff::OracleDenoiser>(law, config_.d, config_.denoise_burn_in);
  }
  return std::make_unique<diff::SubprocessDenoiser>(config_.denoiser.substr(11));
}

void Pipeline::generate() {
  ArrayStore store(dataset_dir());

  // Operators share one mask draw per run so every method sees the same
  // geometry; sigma_n is calibrated per (operator, law).
  std::vector<fwd::ForwardModel> operators;
  nlohmann::json ops_json = nlohmann::json::array();
  for (const auto kind : config_.operators) {
    RandomStream rng = derive_stream(config_.master_seed, "operator", {op_index(kind)});
    operators.push_back(fwd::build_operator(kind, config_.d, rng));
  }

  nlohmann::json sigma_json;
  for (std::size_t law_idx = 0; law_idx < config_.laws.size(); ++law_idx) {
    const auto& law = config_.laws[law_idx];
    const std::string slug = law_slug(law);

    const auto synth_split = [&](const char* split, int count, std::uint64_t base) {
      Eigen::MatrixXd x(count, config_.d);
      Eigen::MatrixXd u(count, config_.d);
      parallel_for(count, config_.threads, [&](int k) {
        RandomStream rng = derive_stream(config_.master_seed, "signal",
                                         {law_idx, base + static_cast<std::uint64_t>(k)});
        const Eigen::VectorXd inc = levy::sample_increments(law, config_.d, rng);
        u.row(k) = inc.transpose();
        x.row(k) = levy::apply_cumulative_sum(inc).transpose();
      });
      store.write(std::string("x_") + split + "_" + slug, x);
      store.write(std::string("u_") + split + "_" + slug, u);
      return x;
    };

    // Disjoint splits by construction: global item indices partition as
    // [0, n_test), [n_test, n_test + n_val), [n_test + n_val, ...).
    const Eigen::MatrixXd x_test = synth_split("test", config_.n_test, 0);
    const Eigen::MatrixXd x_val =
        synth_split("val", config_.n_val, static_cast<std::uint64_t>(config_.n_test));
    const Eigen::MatrixXd x_train =
        synth_split("train", config_.n_train,
                    static_cast<std::uint64_t>(config_.n_test) + config_.n_val);

    for (std::size_t i = 0; i < operators.size(); ++i) {
      fwd::ForwardModel model = operators[i];
      const std::string cell = cell_slug(model.kind, law);

      const int n_cal = std::min(config_.n_train, 1000);
      std::vector<levy::Signal> calibration;
      calibration.reserve(n_cal);
      for (int k = 0; k < n_cal; ++k) calibration.push_back(x_train.row(k).transpose());
      model.sigma_n = fwd::calibrate_noise(model, calibration, config_.snr_db);
      sigma_json[fwd::kind_name(model.kind)][levy::law_name(law)] = model.sigma_n;

      const auto measure = [&](const char* split, const Eigen::MatrixXd& x, const char* tag) {
        Eigen::MatrixXd y(x.rows(), model.m);
        for (Eigen::Index k = 0; k < x.rows(); ++k) {
          RandomStream rng = derive_stream(config_.master_seed, tag,
                                           {law_idx, op_index(model.kind),
                                            static_cast<std::uint64_t>(k)});
          y.row(k) =
              fwd::synthesize_measurement(model, x.row(k).transpose(), rng).y.transpose();
        }
        store.write(std::string("y_") + split + "_" + cell, y);
        return y;
      };
      const Eigen::MatrixXd y_test = measure("test", x_test, "noise-test");
      measure("val", x_val, "noise-val");

      // Gold-standard chains, one per test measurement.
      Eigen::MatrixXd gold_mean(config_.n_test, config_.d);
      Eigen::MatrixXd gold_var(config_.n_test, config_.d);
      Eigen::MatrixXd gold_draws(static_cast<Eigen::Index>(config_.n_test) * config_.gold_keep,
                                 config_.d);
      const int stride = std::max(1, config_.outer_samples / config_.gold_keep);
      parallel_for(config_.n_test, config_.threads, [&](int k) {
        const Eigen::VectorXd y = y_test.row(k).transpose();
        const levy::Signal init = base::solve_l2(y, model, 1.0);
        const auto chain = gibbs::run_posterior_chain(
            model, y, model.sigma_n, law, config_.outer_burn_in, config_.outer_samples, init,
            derive_seed(config_.master_seed, "gold",
                        {law_idx, op_index(model.kind), static_cast<std::uint64_t>(k)}));
        const auto stats = gibbs::chain_statistics(chain);
        gold_mean.row(k) = stats.mean.transpose();
        gold_var.row(k) = stats.marginal_var.transpose();
        for (int j = 0; j < config_.gold_keep; ++j) {
          const int col = std::min<int>(config_.outer_samples - 1, j * stride);
          gold_draws.row(static_cast<Eigen::Index>(k) * config_.gold_keep + j) =
              chain.draws.col(col).transpose();
        }
      });
      store.write("gold_mean_" + cell, gold_mean);
      store.write("gold_var_" + cell, gold_var);
      store.write("gold_draws_" + cell, gold_draws,
                  {static_cast<std::size_t>(config_.n_test),
                   static_cast<std::size_t>(config_.gold_keep),
                   static_cast<std::size_t>(config_.d)});
      std::cout << "generated cell " << cell << " (sigma_n = " << model.sigma_n << ")\n";
    }
  }

  for (const auto& model : operators) ops_json.push_back(fwd::to_json(model));
  nlohmann::json meta;
  meta["config"] = config_to_json(config_);
  meta["operators"] = ops_json;
  meta["sigma_n"] = sigma_json;
  store.save_manifest(meta);
}

void Pipeline::tune() {
  ArrayStore store(dataset_dir());
  store.load_manifest();
  std::filesystem::create_directories(tuning_dir());
  const diff::DiffusionSchedule schedule =
      diff::build_schedule(config_.schedule_steps, config_.beta_0, config_.beta_t);

  for (std::size_t law_idx = 0; law_idx < config_.laws.size(); ++law_idx) {
    const auto& law = config_.laws[law_idx];
    for (const auto kind : config_.operators) {
      const CellKey key{kind, law};
      const std::string cell = key.slug();
      const fwd::ForwardModel model = cell_model(store, key);

      const Eigen::MatrixXd x_val = store.read("x_val_" + law_slug(law));
      const Eigen::MatrixXd y_val = store.read("y_val_" + cell);
      std::vector<base::ValidationItem> validation;
      for (Eigen::Index k = 0; k < x_val.rows(); ++k) {
        validation.push_back({y_val.row(k).transpose(), x_val.row(k).transpose()});
      }

      // Model-based estimators on the full loglinear grid.
      const auto mb_path = tuning_dir() / ("model_based_" + cell + ".json");
      if (!std::filesystem::exists(mb_path)) {
        const base::TuningGrid grid = base::TuningGrid::loglinear(-5.0, 5.0, 1000);
        nlohmann::json mb;

        {
          std::map<double, Eigen::LDLT<Eigen::MatrixXd>> cache;
          const Eigen::MatrixXd a = fwd::dense_matrix(model);
          Eigen::MatrixXd dtd = Eigen::MatrixXd::Zero(config_.d, config_.d);
          for (int i = 0; i < config_.d; ++i) {
            dtd(i, i) = (i + 1 < config_.d) ? 2.0 : 1.0;
            if (i + 1 < config_.d) dtd(i, i + 1) = dtd(i + 1, i) = -1.0;
          }
          const auto estimator = [&](const Eigen::VectorXd& y, double lambda) -> levy::Signal {
            auto it = cache.find(lambda);
            if (it == cache.end()) {
              it = cache.emplace(lambda, Eigen::LDLT<Eigen::MatrixXd>(
                                             a.transpose() * a + 2.0 * lambda * dtd)).first;
            }
            return it->second.solve(a.transpose() * y);
          };
          const double best = base::tune_lambda(estimator, validation, grid);
          mb["l2"] = {{"lambda", best}};
          cache.clear();
        }

        {
          double best_lambda = grid.points.front();
          double best_mse = std::numeric_limits<double>::infinity();
          std::vector<levy::Signal> estimates(validation.size());
          for (const double lambda : grid.points) {
            double mse = 0.0;
            for (std::size_t k = 0; k < validation.size(); ++k) {
              estimates[k] = base::solve_l1(validation[k].y, model, lambda);
              mse += (estimates[k] - validation[k].truth).squaredNorm() / config_.d;
            }
            mse /= static_cast<double>(validation.size());
            if (mse < best_mse) {
              best_mse = mse;
              best_lambda = lambda;
            }
          }
          mb["l1"] = {{"lambda", best_lambda}};
        }

        std::ofstream out(mb_path);
        out << mb.dump(2) << "\n";
        std::cout << "tuned model-based " << cell << "\n";
      }

      // DPS algorithms on their parameter grids.
      std::vector<base::ValidationItem> dps_validation = validation;
      if (config_.tune_val_items > 0 &&
          static_cast<int>(dps_validation.size()) > config_.tune_val_items) {
        dps_validation.resize(config_.tune_val_items);
      }
      const auto denoiser = make_denoiser(law);
      for (const auto& alg : config_.algorithms) {
        const auto path = tuning_dir() / (alg + "_" + cell + ".json");
        if (std::filesystem::exists(path)) continue;
        std::vector<dps::AlgorithmParams> grid;
        if (alg == "cdps") {
          grid = base::cdps_grid();
        } else if (alg == "diffpir") {
          grid = base::diffpir_grid();
        } else if (alg == "dpnp") {
          grid = base::dpnp_grid();
        } else {
          continue;  // externally registered algorithms tune elsewhere
        }
        const auto result = base::tune_dps(
            grid, schedule, config_.denoise_samples, dps_validation, model, *denoiser,
            derive_seed(config_.master_seed, "tune", {law_idx, op_index(kind)}),
            config_.tune_n_samples);
        nlohmann::json j;
        j["algorithm"] = alg;
        j["cell"] = cell;
        j["sse_curve"] = result.sse_curve;
        j["best_index"] = result.best_index;
        j["best"] = dps::params_to_json(result.best);
        std::ofstream out(path);
        out << j.dump(2) << "\n";
        std::cout << "tuned " << alg << " " << cell << "\n";
      }
    }
  }
}

dps::AlgorithmParams Pipeline::tuned_or_default(const std::string& algorithm,
                                                const CellKey& key) const {
  const auto path = tuning_dir() / (algorithm + "_" + key.slug() + ".json");
  if (std::filesystem::exists(path)) {
    std::ifstream in(path);
    nlohmann::json j;
    in >> j;
    return dps::params_from_json(algorithm, j.at("best"));
  }
  return default_dps_parameters(algorithm, key.op, key.law);
}

double Pipeline::tuned_lambda(const std::string& estimator, const CellKey& key) const {
  const auto path = tuning_dir() / ("model_based_" + key.slug() + ".json");
  if (!std::filesystem::exists(path)) {
    throw std::runtime_error("tuned_lambda: no tuning manifest for " + key.slug() +
                             "; run the tune stage first");
  }
  std::ifstream in(path);
  nlohmann::json j;
  in >> j;
  return j.at(estimator).at("lambda").get<double>();
}

int Pipeline::run() {
  ArrayStore store(dataset_dir());
  store.load_manifest();
  const diff::DiffusionSchedule schedule =
      diff::build_schedule(config_.schedule_steps, config_.beta_0, config_.beta_t);
  std::ofstream failures(std::filesystem::path(config_.output_dir) / "failures.log",
                         std::ios::app);
  std::atomic<int> failed{0};

  for (std::size_t law_idx = 0; law_idx < config_.laws.size(); ++law_idx) {
    const auto& law = config_.laws[law_idx];
    const auto denoiser = make_denoiser(law);
    for (const auto kind : config_.operators) {
      const CellKey key{kind, law};
      const std::string cell = key.slug();
      const fwd::ForwardModel model = cell_model(store, key);
      const Eigen::MatrixXd y_test = store.read("y_test_" + cell);

      for (std::size_t alg_idx = 0; alg_idx < config_.algorithms.size(); ++alg_idx) {
        const std::string& alg = config_.algorithms[alg_idx];
        const auto dir = runs_dir() / alg / cell;
        std::filesystem::create_directories(dir);
        dps::DpsConfig dps_config{tuned_or_default(alg, key), schedule,
                                  config_.denoise_samples, config_.n_samples};

        parallel_for(config_.n_test, config_.threads, [&](int k) {
          const auto path = dir / ("item_" + std::to_string(k) + ".f64");
          if (item_file_complete(path, config_.d, config_.n_samples)) return;
          try {
            const auto result = dps::run_dps(
                dps_config, y_test.row(k).transpose(), model, *denoiser,
                derive_seed(config_.master_seed, "run",
                            {alg_idx, law_idx, op_index(kind), static_cast<std::uint64_t>(k)}));
            write_item_file(path, result.draws);
          } catch (const std::exception& e) {
            failures << alg << "," << cell << "," << k << "," << e.what() << "\n";
            ++failed;
          }
        });
        std::cout << "ran " << alg << " " << cell << "\n";
      }
    }
  }
  return failed.load();
}

void Pipeline::evaluate() {
  ArrayStore store(dataset_dir());
  store.load_manifest();
  std::filesystem::create_directories(reports_dir());
  const std::string denoiser_name = config_.denoiser == "oracle" ? "oracle" : "external";

  std::ofstream gaps(reports_dir() / "gaps.csv", std::ios::trunc);
  gaps << "operator,law,method,denoiser,item,value\n";
  std::ofstream coverage(reports_dir() / "coverage.csv", std::ios::trunc);
  coverage << "operator,law,method,denoiser,alpha,coverage\n";
  gaps.precision(12);
  coverage.precision(12);

  constexpr double alpha = 0.9;
  for (std::size_t law_idx = 0; law_idx < config_.laws.size(); ++law_idx) {
    const auto& law = config_.laws[law_idx];
    for (const auto kind : config_.operators) {
      const CellKey key{kind, law};
      const std::string cell = key.slug();
      const std::string op_name = fwd::kind_name(kind);
      const std::string law_name = law_slug(law);  // comma-free for csv
      const fwd::ForwardModel model = cell_model(store, key);

      const Eigen::MatrixXd x_test = store.read("x_test_" + law_slug(law));
      const Eigen::MatrixXd y_test = store.read("y_test_" + cell);
      const Eigen::MatrixXd gold_mean = store.read("gold_mean_" + cell);
      const Eigen::MatrixXd gold_draws = store.read("gold_draws_" + cell);

      const auto log_post = [&](int item, const levy::Signal& x) {
        return eval::log_posterior(model, y_test.row(item).transpose(), model.sigma_n, law, x);
      };

      // Model-based point estimates.
      for (const std::string est : {"l2", "l1"}) {
        double lambda = 0.0;
        try {
          lambda = tuned_lambda(est, key);
        } catch (const std::exception&) {
          continue;  // cell not tuned; leave blank
        }
        for (int k = 0; k < config_.n_test; ++k) {
          const Eigen::VectorXd y = y_test.row(k).transpose();
          const levy::Signal estimate =
              est == "l2" ? base::solve_l2(y, model, lambda) : base::solve_l1(y, model, lambda);
          const double gap = eval::mmse_gap_db(estimate, gold_mean.row(k).transpose(),
                                               x_test.row(k).transpose());
          gaps << op_name << "," << law_name << "," << est << ",-," << k << "," << gap << "\n";
        }
      }

      // Gold-standard coverage row.
      {
        std::vector<Eigen::MatrixXd> samples(config_.n_test);
        std::vector<levy::Signal> truths(config_.n_test);
        for (int k = 0; k < config_.n_test; ++k) {
          Eigen::MatrixXd draws(config_.d, config_.gold_keep);
          for (int j = 0; j < config_.gold_keep; ++j) {
            draws.col(j) =
                gold_draws.row(static_cast<Eigen::Index>(k) * config_.gold_keep + j).transpose();
          }
          samples[k] = std::move(draws);
          truths[k] = x_test.row(k).transpose();
        }
        const auto record = eval::hpd_coverage(samples, truths, log_post, alpha);
        coverage << op_name << "," << law_name << ",gibbs,oracle," << alpha << ","
                 << record.coverage << "\n";
      }

      // DPS draws.
      for (const auto& alg : config_.algorithms) {
        const auto dir = runs_dir() / alg / cell;
        std::vector<Eigen::MatrixXd> samples;
        std::vector<levy::Signal> truths;
        bool complete = true;
        for (int k = 0; k < config_.n_test; ++k) {
          const auto path = dir / ("item_" + std::to_string(k) + ".f64");
          if (!item_file_complete(path, config_.d, config_.n_samples)) {
            complete = false;
            continue;
          }
          const Eigen::MatrixXd draws = read_item_file(path, config_.d, config_.n_samples);
          const levy::Signal mmse = draws.rowwise().mean();
          const double gap =
              eval::mmse_gap_db(mmse, gold_mean.row(k).transpose(), x_test.row(k).transpose());
          gaps << op_name << "," << law_name << "," << alg << "," << denoiser_name << "," << k
               << "," << gap << "\n";
          samples.push_back(draws);
          truths.push_back(x_test.row(k).transpose());
        }
        if (!samples.empty() && complete) {
          const auto record = eval::hpd_coverage(samples, truths, log_post, alpha);
          coverage << op_name << "," << law_name << "," << alg << "," << denoiser_name << ","
                   << alpha << "," << record.coverage << "\n";
        }
      }
    }
  }
}

void Pipeline::diagnose() {
  ArrayStore store(dataset_dir());
  store.load_manifest();
  std::filesystem::create_directories(reports_dir());

  // Protocol datum: St(1) denoising at the calibrated noise level.
  const levy::JumpLaw law = levy::StudentJumps(1.0);
  double sigma = 0.0;
  try {
    sigma = store.extra().at("sigma_n").at("denoising").at(levy::law_name(law)).get<double>();
  } catch (const std::exception&) {
    throw std::runtime_error("diagnose: dataset lacks the st(1) denoising cell");
  }

  const int n_avg = 500;
  const int total = n_avg + 300;
  const auto trace =
      eval::burn_in_diagnostic(law, sigma, config_.diag_chains, n_avg, 10, total, config_.d,
                               derive_seed(config_.master_seed, "diagnose-burnin"));
  {
    std::ofstream out(reports_dir() / "burnin_trace.csv", std::ios::trunc);
    out << "iteration,w1\n";
    out.precision(12);
    for (std::size_t i = 0; i < trace.w1.size(); ++i) {
      out << (i + 1) << "," << trace.w1[i] << "\n";
    }
  }

  const auto count =
      eval::sample_count_diagnostic(law, sigma, config_.diag_chains, n_avg, 1e-2, config_.d,
                                    derive_seed(config_.master_seed, "diagnose-count"));
  {
    std::ofstream out(reports_dir() / "sample_count.csv", std::ios::trunc);
    out << "window,normalized_mse\n";
    out.precision(12);
    for (std::size_t i = 0; i < count.mse_curve.size(); ++i) {
      out << (i + 1) << "," << count.mse_curve[i] << "\n";
    }
  }

  nlohmann::json summary;
  summary["burn_in_plateau_w1"] = trace.plateau;
  summary["burn_in_iterations_to_plateau"] = trace.iterations_to_plateau;
  summary["sample_count_window"] = count.window;
  summary["sample_count_reached"] = count.reached;
  std::ofstream out(reports_dir() / "diagnostics.json", std::ios::trunc);
  out << summary.dump(2) << "\n";
  std::cout << "burn-in plateau after " << trace.iterations_to_plateau
            << " iterations; sample-count window " << count.window << "\n";
}

}  // namespace dpsb::bench
