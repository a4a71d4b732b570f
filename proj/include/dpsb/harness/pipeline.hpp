#pragma once

#include <filesystem>
#include <memory>
#include <string>

#include "dpsb/diffusion.hpp"
#include "dpsb/harness/config.hpp"
#include "dpsb/harness/dataset.hpp"

namespace dpsb::bench {

// Dataset access for one (operator, law) cell.
struct CellKey {
  fwd::OperatorKind op;
  levy::JumpLaw law;
  std::string slug() const;
};

class Pipeline {
 public:
  explicit Pipeline(BenchmarkConfig config);

  const BenchmarkConfig& config() const { return config_; }

  // Dataset generation: signals, operators, calibrated noise, measurements,
  // and gold-standard posterior summaries/draws. Deterministic in the seed.
  void generate();

  // Grid searches: model-based lambda for l1/l2 and the DPS parameter grids.
  // Existing manifests are reused untouched.
  void tune();

  // Posterior draws for every (algorithm, operator, law, test item); items
  // already on disk are skipped, so an interrupted run resumes. Returns the
  // number of items that failed (also recorded in failures.log).
  int run();

  // Per-item gap and coverage CSVs.
  void evaluate();

  // Aggregate tables (gap mean+-std, coverage, oracle-vs-learned deltas).
  void report();

  // Burn-in and sample-count protocols; emits plot-ready traces.
  void diagnose();

  // Helpers shared with tests.
  std::filesystem::path dataset_dir() const;
  std::filesystem::path runs_dir() const;
  std::filesystem::path tuning_dir() const;
  std::filesystem::path reports_dir() const;
  fwd::ForwardModel cell_model(const ArrayStore& store, const CellKey& key) const;
  std::unique_ptr<diff::Denoiser> make_denoiser(const levy::JumpLaw& law) const;
  dps::AlgorithmParams tuned_or_default(const std::string& algorithm, const CellKey& key) const;
  double tuned_lambda(const std::string& estimator, const CellKey& key) const;

 private:
  BenchmarkConfig config_;
};

}  // namespace dpsb::bench
