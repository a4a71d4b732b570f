#include "dpsb/forward_models.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace dpsb::fwd {

std::string kind_name(OperatorKind kind) {
  switch (kind) {
    case OperatorKind::Identity: return "denoising";
    case OperatorKind::Convolution: return "deconvolution";
    case OperatorKind::Imputation: return "imputation";
    case OperatorKind::PartialFourier: return "fourier";
  }
  throw std::logic_error("kind_name: unreachable");
}

OperatorKind parse_kind(const std::string& name) {
  if (name == "denoising" || name == "identity") return OperatorKind::Identity;
  if (name == "deconvolution" || name == "convolution") return OperatorKind::Convolution;
  if (name == "imputation") return OperatorKind::Imputation;
  if (name == "fourier" || name == "partial_fourier") return OperatorKind::PartialFourier;
  throw std::invalid_argument("parse_kind: unknown operator: " + name);
}

ForwardModel make_identity(int d) {
  if (d < 1) throw std::invalid_argument("make_identity: d must be >= 1");
  ForwardModel model;
  model.kind = OperatorKind::Identity;
  model.d = d;
  model.m = d;
  return model;
}

ForwardModel make_convolution(int d) {
  constexpr int taps = 13;
  if (d < taps) throw std::invalid_argument("make_convolution: d must be >= 13");
  ForwardModel model;
  model.kind = OperatorKind::Convolution;
  model.d = d;
  model.m = d;
  model.kernel.resize(taps);
  for (int k = -6; k <= 6; ++k) {
    model.kernel[k + 6] = std::exp(-0.25 * static_cast<double>(k * k));
  }
  model.kernel /= model.kernel.sum();
  return model;
}

ForwardModel make_imputation(int d, RandomStream& rng, double keep_prob) {
  if (d < 1) throw std::invalid_argument("make_imputation: d must be >= 1");
  ForwardModel model;
  model.kind = OperatorKind::Imputation;
  model.d = d;
  for (int k = 0; k < d; ++k) {
    if (rng.uniform() < keep_prob) model.kept_entries.push_back(k);
  }
  model.m = static_cast<int>(model.kept_entries.size());
  return model;
}

ForwardModel make_partial_fourier(int d, RandomStream& rng, double keep_prob) {
  if (d < 1) throw std::invalid_argument("make_partial_fourier: d must be >= 1");
  ForwardModel model;
  model.kind = OperatorKind::PartialFourier;
  model.d = d;
  const int n_freqs = d / 2 + 1;
  for (int f = 0; f < n_freqs; ++f) {
    if (f <= 4 || rng.uniform() < keep_prob) model.kept_freqs.push_back(f);
  }
  model.m = 2 * static_cast<int>(model.kept_freqs.size());
  return model;
}

ForwardModel build_operator(OperatorKind kind, int d, RandomStream& rng) {
  switch (kind) {
    case OperatorKind::Identity: return make_identity(d);
    case OperatorKind::Convolution: return make_convolution(d);
    case OperatorKind::Imputation: return make_imputation(d, rng);
    case OperatorKind::PartialFourier: return make_partial_fourier(d, rng);
  }
  throw std::logic_error("build_operator: unreachable");
}

namespace {

void check_dim(const ForwardModel& model, Eigen::Index got, Eigen::Index want, const char* who) {
  (void)model;
  if (got != want) {
    throw std::invalid_argument(std::string(who) + ": dimension mismatch");
  }
}

}  // namespace

Eigen::VectorXd apply_forward(const ForwardModel& model, const Eigen::VectorXd& x) {
  check_dim(model, x.size(), model.d, "apply_forward");
  switch (model.kind) {
    case OperatorKind::Identity:
      return x;
    case OperatorKind::Convolution: {
      const int d = model.d;
      const int half = static_cast<int>(model.kernel.size()) / 2;
      Eigen::VectorXd y = Eigen::VectorXd::Zero(d);
      for (int i = 0; i < d; ++i) {
        double acc = 0.0;
        for (int k = -half; k <= half; ++k) {
          int j = i - k;
          j -= d * static_cast<int>(std::floor(static_cast<double>(j) / d));
          acc += model.kernel[k + half] * x[j];
        }
        y[i] = acc;
      }
      return y;
    }
    case OperatorKind::Imputation: {
      Eigen::VectorXd y(model.m);
      for (int i = 0; i < model.m; ++i) y[i] = x[model.kept_entries[i]];
      return y;
    }
    case OperatorKind::PartialFourier: {
      Eigen::VectorXd y(model.m);
      const double w0 = 2.0 * std::numbers::pi / model.d;
      for (size_t fi = 0; fi < model.kept_freqs.size(); ++fi) {
        const int f = model.kept_freqs[fi];
        double re = 0.0;
        double im = 0.0;
        for (int k = 0; k < model.d; ++k) {
          re += x[k] * std::cos(w0 * f * k);
          im -= x[k] * std::sin(w0 * f * k);
        }
        y[2 * fi] = re;
        y[2 * fi + 1] = im;
      }
      return y;
    }
  }
  throw std::logic_error("apply_forward: unreachable");
}

Eigen::VectorXd apply_adjoint(const ForwardModel& model, const Eigen::VectorXd& v) {
  check_dim(model, v.size(), model.m, "apply_adjoint");
  switch (model.kind) {
    case OperatorKind::Identity:
      return v;
    case OperatorKind::Convolution: {
      // Circular correlation: adjoint flips the kernel.
      const int d = model.d;
      const int half = static_cast<int>(model.kernel.size()) / 2;
      Eigen::VectorXd x = Eigen::VectorXd::Zero(d);
      for (int j = 0; j < d; ++j) {
        double acc = 0.0;
        for (int k = -half; k <= half; ++k) {
          int i = j + k;
          i -= d * static_cast<int>(std::floor(static_cast<double>(i) / d));
          acc += model.kernel[k + half] * v[i];
        }
        x[j] = acc;
      }
      return x;
    }
    case OperatorKind::Imputation: {
      Eigen::VectorXd x = Eigen::VectorXd::Zero(model.d);
      for (int i = 0; i < model.m; ++i) x[model.kept_entries[i]] = v[i];
      return x;
    }
    case OperatorKind::PartialFourier: {
      Eigen::VectorXd x = Eigen::VectorXd::Zero(model.d);
      const double w0 = 2.0 * std::numbers::pi / model.d;
      for (size_t fi = 0; fi < model.kept_freqs.size(); ++fi) {
        const int f = model.kept_freqs[fi];
        const double re = v[2 * fi];
        const double im = v[2 * fi + 1];
        for (int k = 0; k < model.d; ++k) {
          x[k] += re * std::cos(w0 * f * k) - im * std::sin(w0 * f * k);
        }
      }
      return x;
    }
  }
  throw std::logic_error("apply_adjoint: unreachable");
}

Eigen::MatrixXd dense_matrix(const ForwardModel& model) {
  Eigen::MatrixXd A(model.m, model.d);
  Eigen::VectorXd e = Eigen::VectorXd::Zero(model.d);
  for (int j = 0; j < model.d; ++j) {
    e[j] = 1.0;
    A.col(j) = apply_forward(model, e);
    e[j] = 0.0;
  }
  return A;
}

double calibrate_noise(const ForwardModel& model, std::span<const levy::Signal> signals,
                       double target_snr_db) {
  if (signals.empty()) throw std::invalid_argument("calibrate_noise: empty calibration set");
  if (model.m < 1) throw std::invalid_argument("calibrate_noise: operator has no rows");
  std::vector<double> power;
  power.reserve(signals.size());
  for (const auto& x : signals) {
    power.push_back(apply_forward(model, x).squaredNorm() / model.m);
  }
  std::sort(power.begin(), power.end());
  const size_t n = power.size();
  const double median =
      (n % 2 == 1) ? power[n / 2] : 0.5 * (power[n / 2 - 1] + power[n / 2]);
  if (!(median > 0.0)) {
    throw std::invalid_argument("calibrate_noise: degenerate calibration set (zero signal power)");
  }
  return std::sqrt(median * std::pow(10.0, -target_snr_db / 10.0));
}

Measurement synthesize_measurement(const ForwardModel& model, const levy::Signal& x,
                                   RandomStream& rng) {
  Measurement meas;
  meas.y = apply_forward(model, x);
  for (Eigen::Index i = 0; i < meas.y.size(); ++i) meas.y[i] += model.sigma_n * rng.normal();
  meas.truth = x;
  return meas;
}

nlohmann::json to_json(const ForwardModel& model) {
  nlohmann::json j;
  j["kind"] = kind_name(model.kind);
  j["d"] = model.d;
  j["m"] = model.m;
  j["sigma_n"] = model.sigma_n;
  if (model.kind == OperatorKind::Convolution) {
    j["kernel"] = std::vector<double>(model.kernel.begin(), model.kernel.end());
  } else if (model.kind == OperatorKind::Imputation) {
    j["kept_entries"] = model.kept_entries;
  } else if (model.kind == OperatorKind::PartialFourier) {
    j["kept_freqs"] = model.kept_freqs;
  }
  return j;
}

ForwardModel model_from_json(const nlohmann::json& j) {
  ForwardModel model;
  model.kind = parse_kind(j.at("kind").get<std::string>());
  model.d = j.at("d").get<int>();
  model.m = j.at("m").get<int>();
  model.sigma_n = j.at("sigma_n").get<double>();
  if (model.kind == OperatorKind::Convolution) {
    const auto taps = j.at("kernel").get<std::vector<double>>();
    model.kernel = Eigen::Map<const Eigen::VectorXd>(taps.data(), taps.size());
  } else if (model.kind == OperatorKind::Imputation) {
    model.kept_entries = j.at("kept_entries").get<std::vector<int>>();
  } else if (model.kind == OperatorKind::PartialFourier) {
    model.kept_freqs = j.at("kept_freqs").get<std::vector<int>>();
  }
  return model;
}

}  // namespace dpsb::fwd
