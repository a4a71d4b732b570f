#pragma once

#include <Eigen/Dense>
#include <string>
#include <variant>

#include "dpsb/distributions.hpp"
#include "dpsb/rng.hpp"

namespace dpsb::levy {

using Signal = Eigen::VectorXd;

// Increment (jump) families used to build discrete Levy-process signals.
// All are zero-centered; BernoulliLaplaceJumps uses the rate convention of
// dist::BernoulliLaplace.
struct GaussJumps {
  double var;
  explicit GaussJumps(double var_arg);
};
struct LaplaceJumps {
  double scale;
  explicit LaplaceJumps(double scale_arg);
};
struct StudentJumps {
  double nu;
  explicit StudentJumps(double nu_arg);
};
struct BernoulliLaplaceJumps {
  double atom_prob, rate;
  BernoulliLaplaceJumps(double atom_prob_arg, double rate_arg);
};

using JumpLaw = std::variant<GaussJumps, LaplaceJumps, StudentJumps, BernoulliLaplaceJumps>;

dist::UnivariateLaw increment_law(const JumpLaw& law);

// Finite differences: u_1 = x_1, u_k = x_k - x_{k-1}. Inverse is the running
// sum, so signals synthesize as cumulative sums of i.i.d. increments.
Eigen::VectorXd apply_difference(const Signal& x);
Signal apply_cumulative_sum(const Eigen::VectorXd& u);

Eigen::VectorXd sample_increments(const JumpLaw& law, int d, RandomStream& rng);
Signal synthesize_signal(const JumpLaw& law, int d, RandomStream& rng);

// Sum of increment log-densities over the finite differences of x.
double log_prior(const JumpLaw& law, const Signal& x);
double log_prior_increments(const JumpLaw& law, const Eigen::VectorXd& u);

std::string law_name(const JumpLaw& law);
JumpLaw parse_law(const std::string& text);

}  // namespace dpsb::levy
