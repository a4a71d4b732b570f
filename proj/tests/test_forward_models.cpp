#include <doctest.h>

#include <cmath>

#include "dpsb/forward_models.hpp"

using namespace dpsb;

namespace {

double adjoint_mismatch(const fwd::ForwardModel& model, std::uint64_t seed) {
  RandomStream rng(seed);
  Eigen::VectorXd x(model.d);
  Eigen::VectorXd v(model.m);
  for (int i = 0; i < model.d; ++i) x[i] = rng.normal();
  for (int i = 0; i < model.m; ++i) v[i] = rng.normal();
  const double lhs = fwd::apply_forward(model, x).dot(v);
  const double rhs = x.dot(fwd::apply_adjoint(model, v));
  return std::fabs(lhs - rhs) / std::max(std::fabs(lhs), 1e-30);
}

}  // namespace

TEST_CASE("convolution kernel is the normalized truncated gaussian") {
  const fwd::ForwardModel model = fwd::make_convolution(64);
  REQUIRE(model.kernel.size() == 13);
  CHECK(std::fabs(model.kernel.sum() - 1.0) <= 1e-12);
  for (int k = 0; k < 6; ++k) {
    CHECK(model.kernel[k] == doctest::Approx(model.kernel[12 - k]).epsilon(1e-14));
    CHECK(model.kernel[k] < model.kernel[k + 1]);  // peak at the center
  }
  CHECK(model.kernel[6] == model.kernel.maxCoeff());
  // tap ratio follows exp(-k^2/4): kernel[5]/kernel[6] = exp(-1/4).
  CHECK(model.kernel[5] / model.kernel[6] == doctest::Approx(std::exp(-0.25)).epsilon(1e-12));
  CHECK_THROWS_AS(fwd::make_convolution(12), std::invalid_argument);

  // Unit DC gain: a constant signal convolves to itself.
  const Eigen::VectorXd ones = Eigen::VectorXd::Constant(64, 3.5);
  CHECK((fwd::apply_forward(model, ones) - ones).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("imputation keeps entries as drawn and all-keep equals identity") {
  RandomStream rng(11);
  const fwd::ForwardModel all = fwd::make_imputation(16, rng, 1.0);
  CHECK(all.m == 16);
  Eigen::VectorXd x(16);
  for (int i = 0; i < 16; ++i) x[i] = i - 7.5;
  CHECK((fwd::apply_forward(all, x) - x).norm() == 0.0);

  RandomStream rng2(12);
  const fwd::ForwardModel some = fwd::make_imputation(64, rng2);
  CHECK(some.m == static_cast<int>(some.kept_entries.size()));
  CHECK(some.m > 0);
  CHECK(some.m < 64);
}

TEST_CASE("partial fourier keeps the five lowest frequencies") {
  RandomStream rng(13);
  const fwd::ForwardModel model = fwd::make_partial_fourier(64, rng);
  for (int f = 0; f <= 4; ++f) {
    CHECK(std::find(model.kept_freqs.begin(), model.kept_freqs.end(), f) !=
          model.kept_freqs.end());
  }
  CHECK(model.m == 2 * static_cast<int>(model.kept_freqs.size()));

  // The full matrix has 2(floor(d/2)+1) rows.
  RandomStream rng2(14);
  const fwd::ForwardModel full = fwd::make_partial_fourier(64, rng2, 1.0);
  CHECK(full.m == 66);

  // A^T A depends only on the index difference mod d, so the DFT
  // diagonalizes it.
  const Eigen::MatrixXd a = fwd::dense_matrix(model);
  const Eigen::MatrixXd gram = a.transpose() * a;
  for (int i = 0; i < 64; ++i) {
    for (int j = 0; j < 64; ++j) {
      CHECK(gram(i, j) == doctest::Approx(gram((i + 1) % 64, (j + 1) % 64)).epsilon(1e-9));
    }
  }
}

TEST_CASE("adjoints pass the dot-product test") {
  RandomStream rng(15);
  CHECK(adjoint_mismatch(fwd::make_identity(64), 1) < 1e-10);
  CHECK(adjoint_mismatch(fwd::make_convolution(64), 2) < 1e-10);
  CHECK(adjoint_mismatch(fwd::make_imputation(64, rng), 3) < 1e-10);
  CHECK(adjoint_mismatch(fwd::make_partial_fourier(64, rng), 4) < 1e-10);

  CHECK_THROWS_AS(fwd::apply_forward(fwd::make_identity(8), Eigen::VectorXd::Zero(9)),
                  std::invalid_argument);
}

TEST_CASE("noise calibration inverts the snr definition") {
  const fwd::ForwardModel identity = fwd::make_identity(4);
  std::vector<levy::Signal> calibration{Eigen::VectorXd::Ones(4)};  // ||Ax||^2 = m

  CHECK(fwd::calibrate_noise(identity, calibration, 0.0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(fwd::calibrate_noise(identity, calibration, 25.0) ==
        doctest::Approx(std::pow(10.0, -1.25)).epsilon(1e-12));

  // Scale equivariance: doubling every calibration signal doubles sigma.
  std::vector<levy::Signal> doubled{2.0 * Eigen::VectorXd::Ones(4)};
  CHECK(fwd::calibrate_noise(identity, doubled, 25.0) ==
        doctest::Approx(2.0 * fwd::calibrate_noise(identity, calibration, 25.0)).epsilon(1e-12));

  // Monotone: higher target -> smaller sigma.
  CHECK(fwd::calibrate_noise(identity, calibration, 30.0) <
        fwd::calibrate_noise(identity, calibration, 25.0));

  std::vector<levy::Signal> degenerate{Eigen::VectorXd::Zero(4)};
  CHECK_THROWS_AS(fwd::calibrate_noise(identity, degenerate, 25.0), std::invalid_argument);
  CHECK_THROWS_AS(fwd::calibrate_noise(identity, {}, 25.0), std::invalid_argument);
}

TEST_CASE("measurement synthesis adds calibrated noise") {
  fwd::ForwardModel model = fwd::make_identity(8);
  levy::Signal x(8);
  for (int i = 0; i < 8; ++i) x[i] = std::sin(0.7 * i);

  model.sigma_n = 0.0;
  RandomStream rng(16);
  const fwd::Measurement clean = fwd::synthesize_measurement(model, x, rng);
  CHECK((clean.y - x).norm() == 0.0);
  REQUIRE(clean.truth.has_value());
  CHECK((*clean.truth - x).norm() == 0.0);

  model.sigma_n = 0.3;
  double sum_sq = 0.0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const fwd::Measurement noisy = fwd::synthesize_measurement(model, x, rng);
    sum_sq += (noisy.y - x).squaredNorm();
  }
  CHECK(std::fabs(sum_sq / (n * 8) - 0.09) < 0.003);
}

TEST_CASE("operators serialize losslessly") {
  RandomStream rng(17);
  for (const auto kind :
       {fwd::OperatorKind::Identity, fwd::OperatorKind::Convolution, fwd::OperatorKind::Imputation,
        fwd::OperatorKind::PartialFourier}) {
    fwd::ForwardModel model = fwd::build_operator(kind, 32, rng);
    model.sigma_n = 0.123;
    const fwd::ForwardModel copy = fwd::model_from_json(fwd::to_json(model));
    CHECK(copy.sigma_n == model.sigma_n);
    CHECK(copy.m == model.m);
    CHECK((fwd::dense_matrix(copy) - fwd::dense_matrix(model)).norm() == 0.0);
  }
}
