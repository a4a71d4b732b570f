#include "dpsb/levy_prior.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace dpsb::levy {

GaussJumps::GaussJumps(double var_arg) : var(var_arg) {
  if (!(var > 0.0)) throw std::invalid_argument("GaussJumps: variance must be > 0");
}
LaplaceJumps::LaplaceJumps(double scale_arg) : scale(scale_arg) {
  if (!(scale > 0.0)) throw std::invalid_argument("LaplaceJumps: scale must be > 0");
}
StudentJumps::StudentJumps(double nu_arg) : nu(nu_arg) {
  if (!(nu > 0.0)) throw std::invalid_argument("StudentJumps: nu must be > 0");
}
BernoulliLaplaceJumps::BernoulliLaplaceJumps(double atom_prob_arg, double rate_arg)
    : atom_prob(atom_prob_arg), rate(rate_arg) {
  if (!(atom_prob >= 0.0 && atom_prob <= 1.0)) {
    throw std::invalid_argument("BernoulliLaplaceJumps: atom probability must be in [0, 1]");
  }
  if (!(rate > 0.0)) throw std::invalid_argument("BernoulliLaplaceJumps: rate must be > 0");
}

dist::UnivariateLaw increment_law(const JumpLaw& law) {
  return std::visit(
      [](const auto& l) -> dist::UnivariateLaw {
        using T = std::decay_t<decltype(l)>;
        if constexpr (std::is_same_v<T, GaussJumps>) {
          return dist::Gauss(0.0, l.var);
        } else if constexpr (std::is_same_v<T, LaplaceJumps>) {
          return dist::Laplace(l.scale);
        } else if constexpr (std::is_same_v<T, StudentJumps>) {
          return dist::StudentT(l.nu);
        } else {
          return dist::BernoulliLaplace(l.atom_prob, l.rate);
        }
      },
      law);
}

Eigen::VectorXd apply_difference(const Signal& x) {
  Eigen::VectorXd u(x.size());
  if (x.size() == 0) return u;
  u[0] = x[0];
  for (Eigen::Index k = 1; k < x.size(); ++k) u[k] = x[k] - x[k - 1];
  return u;
}

Signal apply_cumulative_sum(const Eigen::VectorXd& u) {
  Signal x(u.size());
  double acc = 0.0;
  for (Eigen::Index k = 0; k < u.size(); ++k) {
    acc += u[k];
    x[k] = acc;
  }
  return x;
}

Eigen::VectorXd sample_increments(const JumpLaw& law, int d, RandomStream& rng) {
  if (d < 1) throw std::invalid_argument("sample_increments: d must be >= 1");
  const dist::UnivariateLaw uni = increment_law(law);
  Eigen::VectorXd u(d);
  for (int k = 0; k < d; ++k) u[k] = dist::sample_univariate(uni, rng);
  return u;
}

Signal synthesize_signal(const JumpLaw& law, int d, RandomStream& rng) {
  return apply_cumulative_sum(sample_increments(law, d, rng));
}

double log_prior_increments(const JumpLaw& law, const Eigen::VectorXd& u) {
  const dist::UnivariateLaw uni = increment_law(law);
  double total = 0.0;
  for (Eigen::Index k = 0; k < u.size(); ++k) {
    total += dist::log_density_univariate(uni, u[k]);
  }
  return total;
}

double log_prior(const JumpLaw& law, const Signal& x) {
  return log_prior_increments(law, apply_difference(x));
}

namespace {

std::string trim_number(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

}  // namespace

std::string law_name(const JumpLaw& law) {
  return std::visit(
      [](const auto& l) -> std::string {
        using T = std::decay_t<decltype(l)>;
        if constexpr (std::is_same_v<T, GaussJumps>) {
          return "gauss(" + trim_number(l.var) + ")";
        } else if constexpr (std::is_same_v<T, LaplaceJumps>) {
          return "laplace(" + trim_number(l.scale) + ")";
        } else if constexpr (std::is_same_v<T, StudentJumps>) {
          return "st(" + trim_number(l.nu) + ")";
        } else {
          return "bl(" + trim_number(l.atom_prob) + "," + trim_number(l.rate) + ")";
        }
      },
      law);
}

JumpLaw parse_law(const std::string& text) {
  const auto open = text.find('(');
  const auto close = text.rfind(')');
  if (open == std::string::npos || close == std::string::npos || close < open) {
    throw std::invalid_argument("parse_law: expected name(args): " + text);
  }
  const std::string name = text.substr(0, open);
  const std::string args = text.substr(open + 1, close - open - 1);
  const auto comma = args.find(',');
  if (name == "gauss") return GaussJumps(std::stod(args));
  if (name == "laplace") return LaplaceJumps(std::stod(args));
  if (name == "st") return StudentJumps(std::stod(args));
  if (name == "bl") {
    if (comma == std::string::npos) throw std::invalid_argument("parse_law: bl needs two args");
    return BernoulliLaplaceJumps(std::stod(args.substr(0, comma)), std::stod(args.substr(comma + 1)));
  }
  throw std::invalid_argument("parse_law: unknown law: " + text);
}

}  // namespace dpsb::levy
