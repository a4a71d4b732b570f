#include "dpsb/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "dpsb/gibbs.hpp"
#include "dpsb/special_functions.hpp"

namespace dpsb::eval {

double mmse_gap_db(const levy::Signal& est_mean, const levy::Signal& gold_mean,
                   const levy::Signal& truth) {
  const double gold_err = (gold_mean - truth).squaredNorm();
  if (!(gold_err > 0.0)) {
    throw std::invalid_argument("mmse_gap_db: gold-standard error is zero");
  }
  return 10.0 * std::log10((est_mean - truth).squaredNorm() / gold_err);
}

double log_posterior(const fwd::ForwardModel& model, const Eigen::VectorXd& y, double sigma_n,
                     const levy::JumpLaw& law, const levy::Signal& x) {
  const Eigen::VectorXd residual = fwd::apply_forward(model, x) - y;
  return -0.5 * residual.squaredNorm() / (sigma_n * sigma_n) + levy::log_prior(law, x);
}

CoverageRecord hpd_coverage(const std::vector<Eigen::MatrixXd>& samples_per_item,
                            const std::vector<levy::Signal>& truths,
                            const std::function<double(int, const levy::Signal&)>& log_post,
                            double alpha) {
  if (samples_per_item.size() != truths.size()) {
    throw std::invalid_argument("hpd_coverage: item count mismatch");
  }
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("hpd_coverage: alpha in (0,1)");

  CoverageRecord record;
  record.alpha = alpha;
  record.covered.reserve(truths.size());
  int hits = 0;
  for (size_t item = 0; item < truths.size(); ++item) {
    const Eigen::MatrixXd& samples = samples_per_item[item];
    const int n = static_cast<int>(samples.cols());
    if (n < 1) throw std::invalid_argument("hpd_coverage: empty sample set");
    std::vector<double> scores(n);
    for (int k = 0; k < n; ++k) {
      scores[k] = log_post(static_cast<int>(item), samples.col(k));
    }
    std::stable_sort(scores.begin(), scores.end(), std::greater<double>());
    const int idx = static_cast<int>(std::ceil(alpha * n));  // 1-based
    const double threshold = scores[std::min(idx, n) - 1];
    const bool covered = log_post(static_cast<int>(item), truths[item]) >= threshold;
    record.covered.push_back(covered);
    hits += covered ? 1 : 0;
  }
  record.coverage = static_cast<double>(hits) / static_cast<double>(truths.size());
  return record;
}

WilcoxonResult wilcoxon_signed_rank(const std::vector<double>& differences) {
  std::vector<double> nonzero;
  for (const double diff : differences) {
    if (diff != 0.0) nonzero.push_back(diff);
  }
  WilcoxonResult result;
  result.n_nonzero = static_cast<int>(nonzero.size());

  std::vector<double> all = differences;
  std::sort(all.begin(), all.end());
  if (!all.empty()) {
    const size_t n = all.size();
    result.median_diff = (n % 2 == 1) ? all[n / 2] : 0.5 * (all[n / 2 - 1] + all[n / 2]);
  }
  if (nonzero.empty()) return result;  // degenerate: p = 1

  const int n = result.n_nonzero;
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int i, int j) {
    return std::fabs(nonzero[i]) < std::fabs(nonzero[j]);
  });

  std::vector<double> rank(n);
  double tie_correction = 0.0;
  for (int i = 0; i < n;) {
    int j = i;
    while (j < n && std::fabs(nonzero[order[j]]) == std::fabs(nonzero[order[i]])) ++j;
    const double avg_rank = 0.5 * static_cast<double>(i + 1 + j);  // average of ranks i+1..j
    for (int k = i; k < j; ++k) rank[order[k]] = avg_rank;
    const double t = static_cast<double>(j - i);
    tie_correction += t * t * t - t;
    i = j;
  }

  double w_plus = 0.0;
  for (int i = 0; i < n; ++i) {
    if (nonzero[i] > 0.0) w_plus += rank[i];
  }
  const double mean = n * (n + 1) / 4.0;
  const double var = n * (n + 1) * (2.0 * n + 1.0) / 24.0 - tie_correction / 48.0;
  if (!(var > 0.0)) return result;  // all values tied; nothing to test

  double z = w_plus - mean;
  z -= 0.5 * (z > 0.0 ? 1.0 : (z < 0.0 ? -1.0 : 0.0));  // continuity correction
  z /= std::sqrt(var);
  result.p_two_sided = std::min(1.0, 2.0 * (1.0 - normal_cdf(std::fabs(z))));
  return result;
}

double wasserstein1_1d(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("wasserstein1_1d: empty input");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  if (a.size() == b.size()) {
    double total = 0.0;
    for (size_t i = 0; i < a.size(); ++i) total += std::fabs(a[i] - b[i]);
    return total / static_cast<double>(a.size());
  }
  // Unequal counts: integrate |Qa(u) - Qb(u)| exactly over the merged
  // quantile breakpoints i/n and j/m.
  const size_t n = a.size();
  const size_t m = b.size();
  double total = 0.0;
  size_t i = 0;
  size_t j = 0;
  double u = 0.0;
  while (i < n && j < m) {
    const double next_a = static_cast<double>(i + 1) / n;
    const double next_b = static_cast<double>(j + 1) / m;
    const double next = std::min(next_a, next_b);
    total += (next - u) * std::fabs(a[i] - b[j]);
    u = next;
    if (next_a <= next) ++i;
    if (next_b <= next) ++j;
  }
  return total;
}

double ks_distance(std::vector<double> samples, const std::function<double(double)>& cdf) {
  if (samples.empty()) throw std::invalid_argument("ks_distance: empty input");
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double distance = 0.0;
  for (size_t i = 0; i < samples.size(); ++i) {
    const double f = cdf(samples[i]);
    distance = std::max(distance, std::fabs((i + 1.0) / n - f));
    distance = std::max(distance, std::fabs(static_cast<double>(i) / n - f));
  }
  return distance;
}

namespace {

// Shared setup for the two chain-length protocols: one fixed datum, n_chains
// independent chains on the identity-operator problem, reduced one chain at a
// time so memory stays flat in the chain count.
struct ProtocolSummary {
  Eigen::MatrixXd jumps;           // n_chains x total_iters, jump at index 32
  Eigen::VectorXd reference_mean;  // mean over chains of the last n_avg iterates
  Eigen::MatrixXd first_chain;     // d x total_iters
};

ProtocolSummary run_protocol_chains(const levy::JumpLaw& law, double sigma_n, int n_chains,
                                    int n_avg, int total_iters, int d, std::uint64_t seed) {
  if (d < 33) throw std::invalid_argument("protocol: d must be >= 33");
  RandomStream datum_rng = derive_stream(seed, "protocol-datum");
  Eigen::VectorXd datum = levy::synthesize_signal(law, d, datum_rng);
  for (int i = 0; i < d; ++i) datum[i] += sigma_n * datum_rng.normal();

  const fwd::ForwardModel identity = fwd::make_identity(d);
  ProtocolSummary out;
  out.jumps.resize(n_chains, total_iters);
  out.reference_mean = Eigen::VectorXd::Zero(d);
  for (int c = 0; c < n_chains; ++c) {
    const auto chain = gibbs::run_posterior_chain(
        identity, datum, sigma_n, law, /*burn_in=*/0, total_iters, datum,
        derive_seed(seed, "protocol-chain", {static_cast<std::uint64_t>(c)}));
    for (int it = 0; it < total_iters; ++it) {
      out.jumps(c, it) = chain.draws(32, it) - chain.draws(31, it);
    }
    for (int it = total_iters - n_avg; it < total_iters; ++it) {
      out.reference_mean += chain.draws.col(it);
    }
    if (c == 0) out.first_chain = chain.draws;
  }
  out.reference_mean /= static_cast<double>(n_chains) * n_avg;
  return out;
}

}  // namespace

BurnInTrace burn_in_diagnostic(const levy::JumpLaw& law, double sigma_n, int n_chains, int n_avg,
                               int window, int total_iters, int d, std::uint64_t seed) {
  if (n_chains < 1 || n_avg < 1 || window < 1) {
    throw std::invalid_argument("burn_in_diagnostic: counts must be >= 1");
  }
  if (total_iters < n_avg + window) {
    throw std::invalid_argument("burn_in_diagnostic: total_iters too small");
  }
  const ProtocolSummary chains =
      run_protocol_chains(law, sigma_n, n_chains, n_avg, total_iters, d, seed);
  const Eigen::MatrixXd& jumps = chains.jumps;

  std::vector<double> reference;
  reference.reserve(static_cast<size_t>(n_chains) * n_avg);
  for (int it = total_iters - n_avg; it < total_iters; ++it) {
    for (int c = 0; c < n_chains; ++c) reference.push_back(jumps(c, it));
  }

  BurnInTrace trace;
  trace.window = window;
  trace.n_avg = n_avg;
  const int n_windows = total_iters - window + 1;
  trace.w1.reserve(n_windows);
  std::vector<double> pool(static_cast<size_t>(n_chains) * window);
  for (int start = 0; start < n_windows; ++start) {
    size_t idx = 0;
    for (int it = start; it < start + window; ++it) {
      for (int c = 0; c < n_chains; ++c) pool[idx++] = jumps(c, it);
    }
    trace.w1.push_back(wasserstein1_1d(pool, reference));
  }

  std::vector<double> tail(trace.w1.begin() + n_windows / 2, trace.w1.end());
  std::sort(tail.begin(), tail.end());
  trace.plateau = tail[tail.size() / 2];
  trace.iterations_to_plateau = n_windows;
  for (int start = 0; start < n_windows; ++start) {
    if (trace.w1[start] <= 1.5 * trace.plateau) {
      trace.iterations_to_plateau = start + 1;  // 1-based iteration count
      break;
    }
  }
  return trace;
}

SampleCountResult sample_count_diagnostic(const levy::JumpLaw& law, double sigma_n, int n_chains,
                                          int n_avg, double tol, int d, std::uint64_t seed) {
  if (n_chains < 2) throw std::invalid_argument("sample_count_diagnostic: need >= 2 chains");
  const int total_iters = n_avg + std::max(200, n_avg / 2);  // lead-in before the averaging block
  const ProtocolSummary chains =
      run_protocol_chains(law, sigma_n, n_chains, n_avg, total_iters, d, seed);
  const Eigen::VectorXd& reference = chains.reference_mean;

  // Grow a trailing window in the first chain and track the normalized MSE of
  // its running mean against the many-chain reference.
  const Eigen::MatrixXd& chain = chains.first_chain;
  SampleCountResult result;
  result.mse_curve.resize(n_avg);
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(d);
  result.window = n_avg;
  for (int len = 1; len <= n_avg; ++len) {
    acc += chain.col(total_iters - len);
    const Eigen::VectorXd mean = acc / static_cast<double>(len);
    const double mse =
        (mean - reference).squaredNorm() / (static_cast<double>(d) * sigma_n * sigma_n);
    result.mse_curve[len - 1] = mse;
    if (!result.reached && mse <= tol) {
      result.window = len;
      result.reached = true;
    }
  }
  return result;
}

}  // namespace dpsb::eval
