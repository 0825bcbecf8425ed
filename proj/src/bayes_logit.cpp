#include "bayes_epi/bayes_logit.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "bayes_epi/error.hpp"

namespace bayes_epi {
namespace {

constexpr int kMaxHalvings = 30;

struct NewtonResult {
  Eigen::VectorXd beta;
  bool converged = false;
  bool capped = false;
  int iterations = 0;
};

// Accepts a step when the objective does not drop by more than rounding noise;
// near the optimum the true increase is below the resolution of the sum.
bool not_worse(double candidate, double current) {
  return candidate >= current - 1e-13 * (1.0 + std::fabs(current));
}

NewtonResult newton_maximize(const LogisticObjective& obj, const NewtonOptions& opt,
                             double cap, bool unpenalized) {
  NewtonResult r;
  r.beta = Eigen::VectorXd::Zero(obj.dim());
  double f = obj.value(r.beta);
  for (int it = 0; it < opt.max_iter; ++it) {
    const Eigen::VectorXd g = obj.gradient(r.beta);
    const bool small_gradient = g.lpNorm<Eigen::Infinity>() <= opt.tol;
    CholeskyFactor h;
    try {
      h = cholesky(obj.neg_hessian(r.beta));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kNotPositiveDefinite || !unpenalized) throw;
      // Saturated weights after some progress: keep the iterate, non-converged.
      if (it > 0) return r;
      throw Error(ErrorCode::kSingularHessian, "Newton system is singular at iteration " +
                                                   std::to_string(it));
    }
    const Eigen::VectorXd step = solve_spd(h, g);
    // Under separation the gradient vanishes while Newton keeps stepping
    // outward, so a small gradient alone is not a stationary point.
    if (small_gradient && step.lpNorm<Eigen::Infinity>() <= 1e-4 * (1.0 + r.beta.lpNorm<Eigen::Infinity>())) {
      r.converged = true;
      return r;
    }
    double scale = 1.0;
    bool accepted = false;
    Eigen::VectorXd next;
    double f_next = f;
    for (int k = 0; k <= kMaxHalvings; ++k, scale *= 0.5) {
      next = r.beta + scale * step;
      f_next = obj.value(next);
      if (std::isfinite(f_next) && not_worse(f_next, f)) {
        accepted = true;
        break;
      }
    }
    r.iterations = it + 1;
    if (!accepted) {
      r.converged = obj.gradient(r.beta).lpNorm<Eigen::Infinity>() <= opt.tol;
      return r;
    }
    r.beta = next;
    f = f_next;
    const double norm = r.beta.lpNorm<Eigen::Infinity>();
    if (norm > cap) {
      r.beta *= cap / norm;
      r.capped = true;
      return r;
    }
  }
  r.converged = obj.gradient(r.beta).lpNorm<Eigen::Infinity>() <= opt.tol;
  return r;
}

}  // namespace

void PriorSpec::validate() const {
  const auto ok = [](double v) { return std::isfinite(v) && v > 0.0; };
  if (!ok(intercept_sd) || !ok(coef_sd)) {
    throw Error(ErrorCode::kInvalidConfig, "prior standard deviations must be positive and finite");
  }
}

Eigen::VectorXd PriorSpec::precision(Eigen::Index dim) const {
  Eigen::VectorXd p = Eigen::VectorXd::Constant(dim, 1.0 / (coef_sd * coef_sd));
  p(0) = 1.0 / (intercept_sd * intercept_sd);
  return p;
}

LogisticObjective::LogisticObjective(const Eigen::MatrixXd& design, const Eigen::VectorXi& y,
                                     Eigen::VectorXd precision)
    : design_(design), y_(y.cast<double>()), precision_(std::move(precision)) {
  if (design.rows() != y.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "design rows do not match label count");
  }
  if (precision_.size() != design.cols()) {
    throw Error(ErrorCode::kDimensionMismatch, "prior precision length");
  }
}

double LogisticObjective::value(const Eigen::VectorXd& beta) const {
  const Eigen::VectorXd eta = design_ * beta;
  double ll = 0.0;
  for (Eigen::Index i = 0; i < eta.size(); ++i) ll += y_(i) * eta(i) - log1pexp(eta(i));
  return ll - 0.5 * beta.dot(precision_.cwiseProduct(beta));
}

Eigen::VectorXd LogisticObjective::gradient(const Eigen::VectorXd& beta) const {
  const Eigen::VectorXd eta = design_ * beta;
  Eigen::VectorXd resid(eta.size());
  for (Eigen::Index i = 0; i < eta.size(); ++i) resid(i) = y_(i) - stable_sigmoid(eta(i));
  return design_.transpose() * resid - precision_.cwiseProduct(beta);
}

Eigen::MatrixXd LogisticObjective::neg_hessian(const Eigen::VectorXd& beta) const {
  const Eigen::VectorXd eta = design_ * beta;
  Eigen::VectorXd w(eta.size());
  for (Eigen::Index i = 0; i < eta.size(); ++i) {
    const double p = stable_sigmoid(eta(i));
    w(i) = p * (1.0 - p);
  }
  Eigen::MatrixXd h = kernels::weighted_gram(design_, w);
  h.diagonal() += precision_;
  return h;
}

Eigen::MatrixXd with_intercept(const Eigen::MatrixXd& x) {
  Eigen::MatrixXd d(x.rows(), x.cols() + 1);
  d.col(0).setOnes();
  d.rightCols(x.cols()) = x;
  return d;
}

LaplacePosterior fit_map(const LabeledDataset& data, const PriorSpec& prior,
                         const NewtonOptions& options) {
  prior.validate();
  data.validate();
  if (data.size() < 1) throw Error(ErrorCode::kTooFewObservations, "empty training set");
  const Eigen::MatrixXd design = with_intercept(data.x);
  const LogisticObjective obj(design, data.y, prior.precision(design.cols()));
  const NewtonResult r = newton_maximize(obj, options, std::numeric_limits<double>::infinity(),
                                         /*unpenalized=*/false);
  LaplacePosterior post;
  post.map = r.beta;
  post.converged = r.converged;
  post.iterations = r.iterations;
  post.n_obs = data.size();
  const CholeskyFactor h = cholesky(obj.neg_hessian(r.beta));
  post.cov_chol = cholesky(spd_inverse(h));
  return post;
}

LogisticFit fit_mle_design(const Eigen::MatrixXd& design, const Eigen::VectorXi& y,
                           const NewtonOptions& options, double cap) {
  const LogisticObjective obj(design, y, Eigen::VectorXd::Zero(design.cols()));
  const NewtonResult r = newton_maximize(obj, options, cap, /*unpenalized=*/true);
  return {r.beta, r.converged && !r.capped, r.capped, r.iterations};
}

LogisticFit fit_mle(const LabeledDataset& data, const NewtonOptions& options, double cap) {
  data.validate();
  return fit_mle_design(with_intercept(data.x), data.y, options, cap);
}

Eigen::VectorXd predict_probs(const Eigen::VectorXd& coef, const Eigen::MatrixXd& x) {
  if (coef.size() != x.cols() + 1) {
    throw Error(ErrorCode::kDimensionMismatch, "coefficient length does not match covariates");
  }
  Eigen::VectorXd eta = (x * coef.tail(x.cols())).array() + coef(0);
  return eta.unaryExpr([](double v) { return stable_sigmoid(v); });
}

Eigen::MatrixXd sample_coefficients(const LaplacePosterior& post, int draws, RngStream& rng) {
  const Eigen::Index dim = post.map.size();
  Eigen::MatrixXd z(dim, draws);
  for (int s = 0; s < draws; ++s) {
    for (Eigen::Index k = 0; k < dim; ++k) z(k, s) = rng.normal();
  }
  Eigen::MatrixXd out = post.cov_chol.lower.triangularView<Eigen::Lower>() * z;
  out.colwise() += post.map;
  return out;
}

PredictiveDraws posterior_predict(const LaplacePosterior& post, const Eigen::MatrixXd& x_new,
                                  int draws, double level, RngStream& rng, bool keep_samples) {
  if (draws < 100) throw Error(ErrorCode::kInvalidConfig, "need at least 100 predictive draws");
  if (!(level > 0.0 && level < 1.0)) throw Error(ErrorCode::kInvalidConfig, "level outside (0,1)");
  if (x_new.cols() + 1 != post.map.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "new covariates do not match the posterior");
  }
  PredictiveDraws out;
  out.coef_draws = sample_coefficients(post, draws, rng);
  auto summary =
      kernels::predictive_summary(with_intercept(x_new), out.coef_draws, level, keep_samples);
  out.mean = std::move(summary.mean);
  out.lower = std::move(summary.lower);
  out.upper = std::move(summary.upper);
  out.samples = std::move(summary.samples);
  out.draws_per_point = draws;
  out.level = level;
  return out;
}

}  // namespace bayes_epi
