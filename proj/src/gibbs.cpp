#include "dpsb/gibbs.hpp"

#include <cmath>
#include <stdexcept>

#include "dpsb/distributions.hpp"

namespace dpsb::gibbs {

namespace {

constexpr double kMinLatent = 1e-280;

struct Tridiag {
  // Symmetric tridiagonal in (diag, sub); factored in place as L D L^T with
  // unit lower-bidiagonal L.
  Eigen::VectorXd diag;
  Eigen::VectorXd sub;

  void factor() {
    const Eigen::Index d = diag.size();
    for (Eigen::Index k = 0; k + 1 < d; ++k) {
      if (!(diag[k] > 0.0)) throw std::runtime_error("tridiagonal factorization failed");
      sub[k] /= diag[k];
      diag[k + 1] -= sub[k] * sub[k] * diag[k];
    }
    if (d > 0 && !(diag[d - 1] > 0.0)) {
      throw std::runtime_error("tridiagonal factorization failed");
    }
  }

  Eigen::VectorXd solve(const Eigen::VectorXd& b) const {
    const Eigen::Index d = diag.size();
    Eigen::VectorXd x = b;
    for (Eigen::Index k = 1; k < d; ++k) x[k] -= sub[k - 1] * x[k - 1];
    for (Eigen::Index k = 0; k < d; ++k) x[k] /= diag[k];
    for (Eigen::Index k = d - 1; k > 0; --k) x[k - 1] -= sub[k - 1] * x[k];
    return x;
  }

  // x with Cov[x] = T^{-1}: solve L^T x = z / sqrt(D).
  Eigen::VectorXd sample_centered(RandomStream& rng) const {
    const Eigen::Index d = diag.size();
    Eigen::VectorXd x(d);
    for (Eigen::Index k = 0; k < d; ++k) x[k] = rng.normal() / std::sqrt(diag[k]);
    for (Eigen::Index k = d - 1; k > 0; --k) x[k - 1] -= sub[k - 1] * x[k];
    return x;
  }
};

// Precision contribution of the jump factors: D^T diag(w) D is tridiagonal.
Tridiag difference_gram(const Eigen::VectorXd& w) {
  const Eigen::Index d = w.size();
  Tridiag t;
  t.diag.resize(d);
  t.sub.resize(d > 0 ? d - 1 : 0);
  for (Eigen::Index k = 0; k < d; ++k) {
    t.diag[k] = w[k] + (k + 1 < d ? w[k + 1] : 0.0);
    if (k + 1 < d) t.sub[k] = -w[k + 1];
  }
  return t;
}

enum class GlmFamily { Gauss, Laplace, Student };

struct GlmCore {
  GlmFamily family;
  double gauss_var = 0.0;
  double laplace_scale = 0.0;
  double student_nu = 0.0;

  bool banded = false;
  Eigen::VectorXd ata_diag;  // diag(A^T A) / sigma^2 when banded
  Eigen::MatrixXd ata;       // A^T A / sigma^2 otherwise
  Eigen::VectorXd shift;     // A^T y / sigma^2

  explicit GlmCore(const GlmProblem& p) {
    std::visit(
        [this](const auto& l) {
          using T = std::decay_t<decltype(l)>;
          if constexpr (std::is_same_v<T, levy::GaussJumps>) {
            family = GlmFamily::Gauss;
            gauss_var = l.var;
          } else if constexpr (std::is_same_v<T, levy::LaplaceJumps>) {
            family = GlmFamily::Laplace;
            laplace_scale = l.scale;
          } else if constexpr (std::is_same_v<T, levy::StudentJumps>) {
            family = GlmFamily::Student;
            student_nu = l.nu;
          } else {
            throw std::invalid_argument(
                "GlmProblem: Bernoulli-Laplace jumps require the partially collapsed sampler");
          }
        },
        p.law);
    if (!(p.sigma_n > 0.0)) throw std::invalid_argument("GlmProblem: sigma_n must be > 0");

    const double inv_var = 1.0 / (p.sigma_n * p.sigma_n);
    const auto& model = *p.model;
    shift = fwd::apply_adjoint(model, p.y) * inv_var;
    if (model.kind == fwd::OperatorKind::Identity) {
      banded = true;
      ata_diag = Eigen::VectorXd::Constant(model.d, inv_var);
    } else if (model.kind == fwd::OperatorKind::Imputation) {
      banded = true;
      ata_diag = Eigen::VectorXd::Zero(model.d);
      for (int idx : model.kept_entries) ata_diag[idx] = inv_var;
    } else {
      const Eigen::MatrixXd a = fwd::dense_matrix(model);
      ata = (a.transpose() * a) * inv_var;
    }
  }

  // Precision weights of the jump factors given the latents.
  Eigen::VectorXd weights(const Eigen::VectorXd& z, Eigen::Index d) const {
    switch (family) {
      case GlmFamily::Gauss:
        return Eigen::VectorXd::Constant(d, 1.0 / gauss_var);
      case GlmFamily::Laplace: {
        Eigen::VectorXd w(d);
        for (Eigen::Index k = 0; k < d; ++k) {
          if (!(z[k] > 0.0)) throw std::invalid_argument("glm_signal_step: latent must be > 0");
          w[k] = 1.0 / std::max(z[k], kMinLatent);
        }
        return w;
      }
      case GlmFamily::Student: {
        Eigen::VectorXd w(d);
        for (Eigen::Index k = 0; k < d; ++k) {
          if (!(z[k] > 0.0)) throw std::invalid_argument("glm_signal_step: latent must be > 0");
          w[k] = z[k];
        }
        return w;
      }
    }
    throw std::logic_error("weights: unreachable");
  }

  Eigen::VectorXd latents(const levy::Signal& x, RandomStream& rng) const {
    const Eigen::VectorXd u = levy::apply_difference(x);
    Eigen::VectorXd z = Eigen::VectorXd::Zero(u.size());
    switch (family) {
      case GlmFamily::Gauss:
        break;  // degenerate delta(0)
      case GlmFamily::Laplace: {
        const double a = 1.0 / (laplace_scale * laplace_scale);
        for (Eigen::Index k = 0; k < u.size(); ++k) {
          z[k] = dist::sample_gig_or_gamma_limit(a, u[k] * u[k], 0.5, rng);
        }
        break;
      }
      case GlmFamily::Student: {
        for (Eigen::Index k = 0; k < u.size(); ++k) {
          z[k] = rng.gamma(0.5 * (student_nu + 1.0), 0.5 * (student_nu + u[k] * u[k]));
        }
        break;
      }
    }
    return z;
  }

  levy::Signal draw(const Eigen::VectorXd& jump_weights, RandomStream& rng) const {
    if (banded) {
      Tridiag t = difference_gram(jump_weights);
      t.diag += ata_diag;
      t.factor();
      const Eigen::VectorXd mean = t.solve(shift);
      return mean + t.sample_centered(rng);
    }
    Eigen::MatrixXd precision = ata;
    const Tridiag t = difference_gram(jump_weights);
    precision.diagonal() += t.diag;
    const Eigen::Index d = precision.rows();
    for (Eigen::Index k = 0; k + 1 < d; ++k) {
      precision(k + 1, k) += t.sub[k];
      precision(k, k + 1) += t.sub[k];
    }
    return dist::PrecisionGaussian(std::move(precision), shift).sample(rng);
  }
};

}  // namespace

GlmProblem::GlmProblem(const fwd::ForwardModel& model_arg, Eigen::VectorXd y_arg,
                       double sigma_n_arg, levy::JumpLaw law_arg)
    : model(&model_arg), y(std::move(y_arg)), sigma_n(sigma_n_arg), law(law_arg) {
  if (y.size() != model->m) throw std::invalid_argument("GlmProblem: measurement length mismatch");
}

ChainSummary chain_statistics(const Eigen::MatrixXd& draws) {
  const Eigen::Index s = draws.cols();
  if (s < 2) throw std::invalid_argument("chain_statistics: need at least 2 draws");
  ChainSummary out;
  out.mean = draws.rowwise().mean();
  const Eigen::MatrixXd centered = draws.colwise() - out.mean;
  out.covariance = (centered * centered.transpose()) / static_cast<double>(s - 1);
  out.marginal_var = out.covariance.diagonal();
  return out;
}

Eigen::VectorXd glm_latent_step(const GlmProblem& problem, const levy::Signal& x,
                                RandomStream& rng) {
  return GlmCore(problem).latents(x, rng);
}

levy::Signal glm_signal_step(const GlmProblem& problem, const Eigen::VectorXd& z,
                             RandomStream& rng) {
  const GlmCore core(problem);
  return core.draw(core.weights(z, problem.model->d), rng);
}

ChainResult run_glm_chain(const GlmProblem& problem, int burn_in, int samples,
                          const levy::Signal& init, std::uint64_t seed, int thin) {
  if (burn_in < 0 || samples < 1 || thin < 1) {
    throw std::invalid_argument("run_glm_chain: need burn_in >= 0, samples >= 1, thin >= 1");
  }
  const GlmCore core(problem);
  const Eigen::Index d = problem.model->d;
  RandomStream rng(seed);

  ChainResult result;
  result.burn_in = burn_in;
  result.seed = seed;
  result.draws.resize(d, samples);

  levy::Signal x = init;
  // Gaussian jumps are conjugate: the conditional never changes, so the factor
  // and mean are reused across all iterations.
  if (core.family == GlmFamily::Gauss) {
    const Eigen::VectorXd w = core.weights(Eigen::VectorXd(), d);
    if (core.banded) {
      Tridiag t = difference_gram(w);
      t.diag += core.ata_diag;
      t.factor();
      const Eigen::VectorXd mean = t.solve(core.shift);
      const int total = burn_in + samples * thin;
      int kept = 0;
      for (int it = 0; it < total; ++it) {
        x = mean + t.sample_centered(rng);
        if (it >= burn_in && (it - burn_in) % thin == 0 && kept < samples) {
          result.draws.col(kept++) = x;
        }
      }
      return result;
    }
    Eigen::MatrixXd precision = core.ata;
    const Tridiag t = difference_gram(w);
    precision.diagonal() += t.diag;
    for (Eigen::Index k = 0; k + 1 < d; ++k) {
      precision(k + 1, k) += t.sub[k];
      precision(k, k + 1) += t.sub[k];
    }
    const dist::PrecisionGaussian gauss(std::move(precision), core.shift);
    const int total = burn_in + samples * thin;
    int kept = 0;
    for (int it = 0; it < total; ++it) {
      x = gauss.sample(rng);
      if (it >= burn_in && (it - burn_in) % thin == 0 && kept < samples) {
        result.draws.col(kept++) = x;
      }
    }
    return result;
  }

  const int total = burn_in + samples * thin;
  int kept = 0;
  for (int it = 0; it < total; ++it) {
    const Eigen::VectorXd z = core.latents(x, rng);
    x = core.draw(core.weights(z, d), rng);
    if (it >= burn_in && (it - burn_in) % thin == 0 && kept < samples) {
      result.draws.col(kept++) = x;
    }
  }
  return result;
}

// ---------------------------------------------------------------------------
// Bernoulli-Laplace
// ---------------------------------------------------------------------------

BlConditional::BlConditional(Eigen::MatrixXd H, Eigen::VectorXd y, double sigma_n,
                             double atom_prob, double slab_rate)
    : h_mat_(std::move(H)), y_(std::move(y)), sigma_n_(sigma_n), atom_prob_(atom_prob),
      slab_rate_(slab_rate) {
  if (h_mat_.rows() != y_.size()) throw std::invalid_argument("BlConditional: dimension mismatch");
  if (!(sigma_n_ > 0.0)) throw std::invalid_argument("BlConditional: sigma_n must be > 0");
  if (!(atom_prob_ >= 0.0 && atom_prob_ <= 1.0)) {
    throw std::invalid_argument("BlConditional: atom probability must be in [0, 1]");
  }
  if (!(slab_rate_ > 0.0)) throw std::invalid_argument("BlConditional: slab rate must be > 0");
  gram_ = h_mat_.transpose() * h_mat_;
  hy_ = h_mat_.transpose() * y_;
  yy_ = y_.squaredNorm();
  log_prior_odds_ = std::log1p(-atom_prob_) - std::log(atom_prob_);
  w_ = Eigen::VectorXd::Ones(dim());
  v_.assign(dim(), 0);
  set_latents(w_, v_);
}

void BlConditional::set_latents(const Eigen::VectorXd& w, const std::vector<std::uint8_t>& v) {
  const int d = dim();
  if (w.size() != d || static_cast<int>(v.size()) != d) {
    throw std::invalid_argument("set_latents: dimension mismatch");
  }
  w_ = w;
  v_ = v;

  const double inv_var = 1.0 / (sigma_n_ * sigma_n_);
  const double m = static_cast<double>(h_mat_.rows());
  on_scratch_.clear();
  for (int k = 0; k < d; ++k) {
    if (v_[k]) on_scratch_.push_back(k);
  }
  const int q = static_cast<int>(on_scratch_.size());

  if (q == 0) {
    proj_ = gram_ * inv_var;
    proj_y_ = hy_ * inv_var;
    log_det_b_ = m * std::log(sigma_n_ * sigma_n_);
    quad_ = yy_ * inv_var;
    return;
  }

  // Woodbury through the active set: B^{-1} = (I - H_on core^{-1} H_on^T / s^2) / s^2
  // with core = diag(1/w_on) + Gram_on,on / s^2.
  if (gram_on_.rows() != d) {
    gram_on_.resize(d, d);
    core_.resize(d, d);
    solved_.resize(d, d);
  }
  auto gram_on = gram_on_.topLeftCorner(d, q);
  auto core = core_.topLeftCorner(q, q);
  Eigen::VectorXd hy_on(q);
  for (int j = 0; j < q; ++j) {
    gram_on.col(j) = gram_.col(on_scratch_[j]);
    hy_on[j] = hy_[on_scratch_[j]];
  }
  for (int i = 0; i < q; ++i) {
    for (int j = 0; j < q; ++j) core(i, j) = gram_(on_scratch_[i], on_scratch_[j]) * inv_var;
    core(i, i) += 1.0 / w_[on_scratch_[i]];
  }
  Eigen::LLT<Eigen::Ref<Eigen::MatrixXd>> llt(core);
  if (llt.info() != Eigen::Success) {
    throw std::runtime_error("BlConditional: core factorization failed");
  }

  double log_det_core = 0.0;
  for (int i = 0; i < q; ++i) log_det_core += 2.0 * std::log(core(i, i));
  double log_det_w = 0.0;
  for (int j = 0; j < q; ++j) log_det_w += std::log(w_[on_scratch_[j]]);
  log_det_b_ = m * std::log(sigma_n_ * sigma_n_) + log_det_w + log_det_core;

  auto solved = solved_.topLeftCorner(q, d);
  solved = gram_on.transpose();
  llt.solveInPlace(solved);
  proj_ = gram_ * inv_var;
  proj_.noalias() -= (inv_var * inv_var) * (gram_on * solved);
  const Eigen::VectorXd core_hy = llt.solve(hy_on);
  proj_y_ = hy_ * inv_var;
  proj_y_.noalias() -= (inv_var * inv_var) * (gram_on * core_hy);
  quad_ = yy_ * inv_var - hy_on.dot(core_hy) * (inv_var * inv_var);
}

double BlConditional::flip_log_odds(int k) const {
  if (v_[k]) throw std::logic_error("flip_log_odds: bit must be off");
  const double c = w_[k];
  const double tau = proj_(k, k);
  const double s = proj_y_[k];
  const double grow = 1.0 + c * tau;
  return log_prior_odds_ - 0.5 * std::log(grow) + 0.5 * c * s * s / grow;
}

double BlConditional::support_log_odds(int k) const {
  if (!v_[k]) return flip_log_odds(k);
  // Bit on: the off-state scalars follow from the current ones, since
  // tau_off = tau/(1 - c tau) and s_off = s/(1 - c tau).
  const double c = w_[k];
  const double shrink = std::max(1.0 - c * proj_(k, k), 1e-300);
  const double s = proj_y_[k];
  return log_prior_odds_ + 0.5 * std::log(shrink) + 0.5 * c * s * s / shrink;
}

void BlConditional::set_bit(int k, bool on) {
  if (static_cast<bool>(v_[k]) == on) return;
  const double c = w_[k];
  if (flip_col_.size() != proj_.rows()) flip_col_.resize(proj_.rows());
  flip_col_ = proj_.col(k);
  const Eigen::VectorXd& g = flip_col_;
  const double tau = proj_(k, k);
  const double s = proj_y_[k];
  if (on) {
    // Determinant lemma / Sherman-Morrison for B -> B + c H_k H_k^T.
    const double grow = 1.0 + c * tau;
    const double gamma = c / grow;
    proj_.noalias() -= gamma * (g * g.transpose());
    proj_y_.noalias() -= (gamma * s) * g;
    log_det_b_ += std::log(grow);
    quad_ -= c * s * s / grow;
    v_[k] = 1;
  } else {
    // Reverse update for B -> B - c H_k H_k^T; 1 - c tau stays positive
    // because the downdated matrix is still positive definite.
    const double shrink = std::max(1.0 - c * tau, 1e-300);
    const double gamma = c / shrink;
    proj_.noalias() += gamma * (g * g.transpose());
    proj_y_.noalias() += (gamma * s) * g;
    log_det_b_ += std::log(shrink);
    quad_ += c * s * s / shrink;
    v_[k] = 0;
  }
}

double BlConditional::dense_log_det_b() const {
  const Eigen::Index m = h_mat_.rows();
  Eigen::MatrixXd b = sigma_n_ * sigma_n_ * Eigen::MatrixXd::Identity(m, m);
  for (int k = 0; k < dim(); ++k) {
    if (v_[k]) b.noalias() += w_[k] * (h_mat_.col(k) * h_mat_.col(k).transpose());
  }
  const Eigen::LLT<Eigen::MatrixXd> llt(b);
  double log_det = 0.0;
  for (Eigen::Index i = 0; i < m; ++i) log_det += 2.0 * std::log(llt.matrixLLT()(i, i));
  return log_det;
}

double BlConditional::dense_quad_form() const {
  const Eigen::Index m = h_mat_.rows();
  Eigen::MatrixXd b = sigma_n_ * sigma_n_ * Eigen::MatrixXd::Identity(m, m);
  for (int k = 0; k < dim(); ++k) {
    if (v_[k]) b.noalias() += w_[k] * (h_mat_.col(k) * h_mat_.col(k).transpose());
  }
  return y_.dot(b.llt().solve(y_));
}

double bl_flip_logodds(BlConditional& state, int k) {
  if (state.bit(k)) state.set_bit(k, false);
  return state.flip_log_odds(k);
}

Eigen::MatrixXd integrated_operator(const fwd::ForwardModel& model) {
  Eigen::MatrixXd h(model.m, model.d);
  Eigen::VectorXd tail = Eigen::VectorXd::Zero(model.d);
  for (int k = model.d - 1; k >= 0; --k) {
    tail[k] = 1.0;
    h.col(k) = fwd::apply_forward(model, tail);
  }
  return h;
}

ChainResult run_bl_chain(const fwd::ForwardModel& model, const Eigen::VectorXd& y,
                         double atom_prob, double slab_rate, double sigma_n, int burn_in,
                         int samples, const Eigen::VectorXd& init_u, std::uint64_t seed,
                         int thin) {
  if (burn_in < 0 || samples < 1 || thin < 1) {
    throw std::invalid_argument("run_bl_chain: need burn_in >= 0, samples >= 1, thin >= 1");
  }
  const int d = model.d;
  if (init_u.size() != d) throw std::invalid_argument("run_bl_chain: init_u length mismatch");

  BlConditional cond(integrated_operator(model), y, sigma_n, atom_prob, slab_rate);
  RandomStream rng(seed);

  ChainResult result;
  result.burn_in = burn_in;
  result.seed = seed;
  result.draws.resize(d, samples);

  Eigen::VectorXd u = init_u;
  std::vector<std::uint8_t> v(d);
  for (int k = 0; k < d; ++k) v[k] = (u[k] != 0.0) ? 1 : 0;
  Eigen::VectorXd w = Eigen::VectorXd::Ones(d);

  const double b2 = slab_rate * slab_rate;
  const double inv_var = 1.0 / (sigma_n * sigma_n);
  const int total = burn_in + samples * thin;
  int kept = 0;
  for (int it = 0; it < total; ++it) {
    // Scale draw: exponential prior where the bit is off, GIG conditional on
    // the jump height where it is on.
    for (int k = 0; k < d; ++k) {
      w[k] = v[k] ? dist::sample_gig_or_gamma_limit(b2, u[k] * u[k], 0.5, rng)
                  : rng.exponential(0.5 * b2);
    }
    cond.set_latents(w, v);

    // Support sweep; rank-one updates are paid only by bits that flip.
    for (int k = 0; k < d; ++k) {
      const double delta = cond.support_log_odds(k);
      const double p_on = 1.0 / (1.0 + std::exp(-delta));
      const bool want_on = rng.uniform() < p_on;
      if (want_on != cond.bit(k)) cond.set_bit(k, want_on);
      v[k] = want_on ? 1 : 0;
    }

    // Jump draw on the active set; exact zeros elsewhere.
    std::vector<int> on;
    for (int k = 0; k < d; ++k) {
      if (v[k]) on.push_back(k);
    }
    u.setZero();
    if (!on.empty()) {
      const int q = static_cast<int>(on.size());
      Eigen::MatrixXd precision(q, q);
      Eigen::VectorXd shift(q);
      const Eigen::MatrixXd& gram = cond.gram();
      const Eigen::VectorXd& hy = cond.adjoint_y();
      for (int i = 0; i < q; ++i) {
        for (int j = 0; j < q; ++j) precision(i, j) = gram(on[i], on[j]) * inv_var;
        precision(i, i) += 1.0 / w[on[i]];
        shift[i] = hy[on[i]] * inv_var;
      }
      const Eigen::VectorXd u_on = dist::PrecisionGaussian(std::move(precision), shift).sample(rng);
      for (int i = 0; i < q; ++i) u[on[i]] = u_on[i];
    }

    if (it >= burn_in && (it - burn_in) % thin == 0 && kept < samples) {
      result.draws.col(kept++) = levy::apply_cumulative_sum(u);
    }
  }
  return result;
}

ChainResult run_posterior_chain(const fwd::ForwardModel& model, const Eigen::VectorXd& y,
                                double sigma_n, const levy::JumpLaw& law, int burn_in,
                                int samples, const levy::Signal& init, std::uint64_t seed,
                                int thin) {
  if (const auto* bl = std::get_if<levy::BernoulliLaplaceJumps>(&law)) {
    return run_bl_chain(model, y, bl->atom_prob, bl->rate, sigma_n, burn_in, samples,
                        levy::apply_difference(init), seed, thin);
  }
  const GlmProblem problem(model, y, sigma_n, law);
  return run_glm_chain(problem, burn_in, samples, init, seed, thin);
}

}  // namespace dpsb::gibbs
