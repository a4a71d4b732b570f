#pragma once

#include <Eigen/Dense>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dpsb/levy_prior.hpp"
#include "dpsb/rng.hpp"

#include <json.hpp>

namespace dpsb::fwd {

enum class OperatorKind { Identity, Convolution, Imputation, PartialFourier };

std::string kind_name(OperatorKind kind);
OperatorKind parse_kind(const std::string& name);

// A linear measurement operator A in R^{m x d} plus the calibrated noise
// level. Immutable after construction; apply/adjoint are pure.
struct ForwardModel {
  OperatorKind kind = OperatorKind::Identity;
  int d = 0;
  int m = 0;
  double sigma_n = 0.0;            // 0 until calibrated
  Eigen::VectorXd kernel;          // convolution taps, center at index taps/2
  std::vector<int> kept_entries;   // imputation: selected signal indices
  std::vector<int> kept_freqs;     // partial Fourier: selected frequencies
};

ForwardModel make_identity(int d);
// 13 central taps of a Gaussian with variance 2, normalized to unit sum,
// applied circularly.
ForwardModel make_convolution(int d);
ForwardModel make_imputation(int d, RandomStream& rng, double keep_prob = 0.4);
// Real DFT rows, both (cos, -sin) rows per frequency; frequencies 0..4 always
// kept, the rest kept jointly with keep_prob.
ForwardModel make_partial_fourier(int d, RandomStream& rng, double keep_prob = 0.4);
ForwardModel build_operator(OperatorKind kind, int d, RandomStream& rng);

Eigen::VectorXd apply_forward(const ForwardModel& model, const Eigen::VectorXd& x);
Eigen::VectorXd apply_adjoint(const ForwardModel& model, const Eigen::VectorXd& v);
Eigen::MatrixXd dense_matrix(const ForwardModel& model);

// Solves for sigma_n so the median of 10 log10(||A x||^2 / (m sigma_n^2))
// over the calibration set equals the target.
double calibrate_noise(const ForwardModel& model, std::span<const levy::Signal> signals,
                       double target_snr_db);

struct Measurement {
  Eigen::VectorXd y;
  std::optional<levy::Signal> truth;  // data-generating signal, evaluation only
};

Measurement synthesize_measurement(const ForwardModel& model, const levy::Signal& x,
                                   RandomStream& rng);

nlohmann::json to_json(const ForwardModel& model);
ForwardModel model_from_json(const nlohmann::json& j);

}  // namespace dpsb::fwd
