#include "bayes_epi/gp_bo.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>

#include "bayes_epi/error.hpp"

namespace bayes_epi {
namespace {

constexpr double kLogLengthLo = -2.995732273553991;  // log 0.05
constexpr double kLogLengthHi = 0.6931471805599453;  // log 2
constexpr double kLogVarLo = -9.210340371976182;     // log 1e-4
constexpr double kLogVarHi = 1.3862943611198906;     // log 4
constexpr double kLogNoiseLo = -13.815510557964274;  // log 1e-6
constexpr double kLogNoiseHi = 0.0;

constexpr std::array<int, 16> kPrimes = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53};

double radical_inverse(std::uint64_t i, int base) {
  double inv = 1.0 / base;
  double f = inv;
  double r = 0.0;
  while (i > 0) {
    r += f * static_cast<double>(i % static_cast<std::uint64_t>(base));
    i /= static_cast<std::uint64_t>(base);
    f *= inv;
  }
  return r;
}

std::string format_theta(const HyperPoint& theta) {
  std::ostringstream os;
  os << '(';
  for (Eigen::Index k = 0; k < theta.size(); ++k) os << (k ? ", " : "") << theta(k);
  os << ')';
  return os.str();
}

double lml_or_neg_inf(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const Domain& domain,
                      const Eigen::VectorXd& q) {
  const Eigen::Index d = domain.dim();
  KernelParams k{q.head(d).array().exp(), std::exp(q(d))};
  try {
    return log_marginal_likelihood(GpSurrogate(domain, x, y, k, std::exp(q(d + 1))));
  } catch (const Error&) {
    return -std::numeric_limits<double>::infinity();
  }
}

}  // namespace

void Domain::validate() const {
  if (lower.size() == 0 || lower.size() != upper.size()) {
    throw Error(ErrorCode::kInvalidConfig, "domain bounds must be non-empty and equal length");
  }
  for (Eigen::Index k = 0; k < lower.size(); ++k) {
    if (!std::isfinite(lower(k)) || !std::isfinite(upper(k)) || !(lower(k) < upper(k))) {
      throw Error(ErrorCode::kInvalidConfig, "domain requires finite lower < upper");
    }
  }
}

bool Domain::contains(const Eigen::VectorXd& theta) const {
  return theta.size() == dim() && (theta.array() >= lower.array()).all() &&
         (theta.array() <= upper.array()).all();
}

Eigen::VectorXd Domain::to_unit(const Eigen::VectorXd& theta) const {
  return (theta - lower).cwiseQuotient(upper - lower);
}

Eigen::VectorXd Domain::from_unit(const Eigen::VectorXd& u) const {
  Eigen::VectorXd theta = lower + u.cwiseProduct(upper - lower);
  return theta.cwiseMax(lower).cwiseMin(upper);
}

Domain Domain::unit(Eigen::Index d) { return {Eigen::VectorXd::Zero(d), Eigen::VectorXd::Ones(d)}; }

void KernelParams::validate(Eigen::Index d) const {
  if (lengthscales.size() != d) throw Error(ErrorCode::kDimensionMismatch, "lengthscale count");
  if (!(lengthscales.array() > 0.0).all() || !(variance > 0.0)) {
    throw Error(ErrorCode::kInvalidConfig, "kernel parameters must be positive");
  }
}

GpSurrogate::GpSurrogate(Domain domain, Eigen::MatrixXd x_obs, Eigen::VectorXd y_obs,
                         KernelParams params, double noise_variance)
    : domain_(std::move(domain)), x_obs_(std::move(x_obs)), y_obs_(std::move(y_obs)),
      kernel_(std::move(params)), noise_(noise_variance) {
  domain_.validate();
  const Eigen::Index t = x_obs_.rows();
  if (t < 1) throw Error(ErrorCode::kTooFewObservations, "GP needs at least one observation");
  if (x_obs_.cols() != domain_.dim() || y_obs_.size() != t) {
    throw Error(ErrorCode::kDimensionMismatch, "GP observations do not match the domain");
  }
  kernel_.validate(domain_.dim());
  if (!(noise_ >= 0.0)) throw Error(ErrorCode::kInvalidConfig, "noise variance must be >= 0");

  unit_obs_.resize(t, x_obs_.cols());
  for (Eigen::Index i = 0; i < t; ++i) {
    unit_obs_.row(i) = domain_.to_unit(x_obs_.row(i).transpose()).transpose();
  }
  y_mean_ = y_obs_.mean();
  Eigen::MatrixXd gram(t, t);
  for (Eigen::Index i = 0; i < t; ++i) {
    for (Eigen::Index j = 0; j <= i; ++j) {
      gram(i, j) = gram(j, i) = kernel(unit_obs_.row(i).transpose(), unit_obs_.row(j).transpose());
    }
    gram(i, i) += noise_;
  }
  gram_chol_ = cholesky(gram);
  alpha_ = solve_spd(gram_chol_, Eigen::VectorXd(y_obs_.array() - y_mean_));
}

double GpSurrogate::kernel(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const {
  const double r2 = (a - b).cwiseQuotient(kernel_.lengthscales).squaredNorm();
  return kernel_.variance * std::exp(-0.5 * r2);
}

GpSurrogate::Prediction GpSurrogate::posterior(const HyperPoint& theta) const {
  const Eigen::VectorXd u = domain_.to_unit(theta);
  Eigen::VectorXd k(size());
  for (Eigen::Index i = 0; i < size(); ++i) k(i) = kernel(unit_obs_.row(i).transpose(), u);
  const Eigen::VectorXd v = solve_lower(gram_chol_, k);
  const double var = kernel_.variance - v.squaredNorm();
  return {y_mean_ + k.dot(alpha_), var > 0.0 ? std::sqrt(var) : 0.0};
}

GpSurrogate gp_condition(const Eigen::MatrixXd& x_obs, const Eigen::VectorXd& y_obs,
                         const KernelParams& kernel, double noise_variance) {
  return GpSurrogate(Domain::unit(x_obs.cols()), x_obs, y_obs, kernel, noise_variance);
}

GpSurrogate gp_condition(const Eigen::MatrixXd& x_obs, const Eigen::VectorXd& y_obs,
                         const KernelParams& kernel, double noise_variance, const Domain& domain) {
  return GpSurrogate(domain, x_obs, y_obs, kernel, noise_variance);
}

GpSurrogate::Prediction gp_posterior(const GpSurrogate& s, const HyperPoint& theta) {
  return s.posterior(theta);
}

double ucb(const GpSurrogate& s, const HyperPoint& theta, double kappa) {
  const auto p = s.posterior(theta);
  return p.mean + kappa * p.sd;
}

double log_marginal_likelihood(const GpSurrogate& s) {
  const Eigen::VectorXd r = s.y_obs().array() - s.y_mean();
  const Eigen::VectorXd w = solve_lower(s.gram_chol(), r);
  const double t = static_cast<double>(s.size());
  return -0.5 * w.squaredNorm() - 0.5 * s.gram_chol().log_determinant() -
         0.5 * t * std::log(2.0 * std::numbers::pi);
}

GpHyperparameters fit_gp_hyperparameters(const Eigen::MatrixXd& x_obs, const Eigen::VectorXd& y_obs,
                                         const Domain& domain) {
  const Eigen::Index d = domain.dim();
  const double var_y = (y_obs.array() - y_obs.mean()).square().mean();
  const double log_v0 = std::clamp(std::log(std::max(var_y, 1e-300)), kLogVarLo, kLogVarHi);
  const double log_n0 = std::clamp(log_v0 + std::log(1e-2), kLogNoiseLo, kLogNoiseHi);

  Eigen::VectorXd lo(d + 2), hi(d + 2);
  lo.head(d).setConstant(kLogLengthLo);
  hi.head(d).setConstant(kLogLengthHi);
  lo(d) = kLogVarLo;
  hi(d) = kLogVarHi;
  lo(d + 1) = kLogNoiseLo;
  hi(d + 1) = kLogNoiseHi;

  Eigen::VectorXd best_q;
  double best = -std::numeric_limits<double>::infinity();
  for (const double ls : {0.1, 0.3, 1.0}) {
    Eigen::VectorXd q(d + 2);
    q.head(d).setConstant(std::log(ls));
    q(d) = log_v0;
    q(d + 1) = log_n0;
    double f = lml_or_neg_inf(x_obs, y_obs, domain, q);
    for (double step = 1.0; step >= 1e-3;) {
      bool moved = false;
      for (Eigen::Index k = 0; k < q.size(); ++k) {
        for (const double sign : {1.0, -1.0}) {
          Eigen::VectorXd trial = q;
          trial(k) = std::clamp(q(k) + sign * step, lo(k), hi(k));
          if (trial(k) == q(k)) continue;
          const double ft = lml_or_neg_inf(x_obs, y_obs, domain, trial);
          if (ft > f + 1e-12) {
            q = trial;
            f = ft;
            moved = true;
          }
        }
      }
      if (!moved) step *= 0.5;
    }
    if (best_q.size() == 0 || f > best) {
      best = f;
      best_q = q;
    }
  }
  if (!std::isfinite(best)) {
    throw Error(ErrorCode::kNotPositiveDefinite, "no kernel hyperparameters gave a usable Gram matrix");
  }
  return {KernelParams{best_q.head(d).array().exp(), std::exp(best_q(d))}, std::exp(best_q(d + 1)),
          best};
}

Eigen::MatrixXd halton_points(Eigen::Index n, Eigen::Index d, RngStream& rng) {
  if (d < 1 || d > static_cast<Eigen::Index>(kPrimes.size())) {
    throw Error(ErrorCode::kInvalidConfig, "Halton dimension must lie in [1, 16]");
  }
  Eigen::VectorXd shift(d);
  for (Eigen::Index k = 0; k < d; ++k) shift(k) = rng.uniform();
  Eigen::MatrixXd pts(n, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index k = 0; k < d; ++k) {
      const double h = radical_inverse(static_cast<std::uint64_t>(i + 1), kPrimes[k]) + shift(k);
      pts(i, k) = h - std::floor(h);
    }
  }
  return pts;
}

Eigen::MatrixXd space_filling_design(const Domain& domain, Eigen::Index n, RngStream& rng) {
  domain.validate();
  Eigen::MatrixXd u = halton_points(n, domain.dim(), rng);
  for (Eigen::Index i = 0; i < n; ++i) u.row(i) = domain.from_unit(u.row(i).transpose()).transpose();
  return u;
}

HyperPoint propose_next(const GpSurrogate& s, const Domain& domain, double kappa, RngStream& rng,
                        const ProposeOptions& options) {
  domain.validate();
  if (!(kappa >= 0.0)) throw Error(ErrorCode::kInvalidConfig, "kappa must be nonnegative");
  const Eigen::Index d = domain.dim();

  Eigen::MatrixXd obs_unit(s.size(), d);
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    obs_unit.row(i) = domain.to_unit(s.x_obs().row(i).transpose()).transpose();
  }
  auto is_duplicate = [&](const Eigen::VectorXd& u) {
    for (Eigen::Index i = 0; i < obs_unit.rows(); ++i) {
      if ((obs_unit.row(i).transpose() - u).norm() <= options.duplicate_tol) return true;
    }
    return false;
  };

  Eigen::VectorXd best_u;
  double best = -std::numeric_limits<double>::infinity();
  auto score = [&](const Eigen::VectorXd& u) {
    const double a = ucb(s, domain.from_unit(u), kappa);
    if (a > best && !is_duplicate(u)) {
      best = a;
      best_u = u;
    }
    return a;
  };

  const Eigen::MatrixXd cand = halton_points(options.candidates, d, rng);
  std::vector<std::pair<double, Eigen::Index>> ranked;
  ranked.reserve(static_cast<std::size_t>(cand.rows()));
  for (Eigen::Index i = 0; i < cand.rows(); ++i) {
    ranked.emplace_back(score(cand.row(i).transpose()), i);
  }
  const auto top = std::min<std::size_t>(static_cast<std::size_t>(options.refine_starts), ranked.size());
  std::partial_sort(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(top), ranked.end(),
                    [](const auto& a, const auto& b) {
                      return a.first > b.first || (a.first == b.first && a.second < b.second);
                    });

  for (std::size_t r = 0; r < top; ++r) {
    Eigen::VectorXd u = cand.row(ranked[r].second).transpose();
    double f = ranked[r].first;
    for (double step = options.initial_step; step >= options.min_step;) {
      bool moved = false;
      for (Eigen::Index k = 0; k < d; ++k) {
        for (const double sign : {1.0, -1.0}) {
          Eigen::VectorXd trial = u;
          trial(k) = std::clamp(u(k) + sign * step, 0.0, 1.0);
          if (trial(k) == u(k)) continue;
          const double ft = score(trial);
          if (ft > f) {
            u = trial;
            f = ft;
            moved = true;
          }
        }
      }
      if (!moved) step *= 0.5;
    }
  }
  if (best_u.size() == 0) best_u = cand.row(ranked.front().second).transpose();
  return domain.from_unit(best_u);
}

std::vector<double> BoHistory::running_best() const {
  std::vector<double> out;
  out.reserve(rows.size());
  double m = -std::numeric_limits<double>::infinity();
  for (const auto& row : rows) {
    m = std::max(m, row.value);
    out.push_back(m);
  }
  return out;
}

BoHistory bo_run(const Objective& objective, const Domain& domain, const BoOptions& options,
                 RngStream& rng) {
  domain.validate();
  if (options.init_n < 1 || options.iters < 0 || !(options.kappa >= 0.0)) {
    throw Error(ErrorCode::kInvalidConfig, "BO needs init_n >= 1, iters >= 0, kappa >= 0");
  }
  const Eigen::Index d = domain.dim();
  const int total = options.init_n + options.iters;
  Eigen::MatrixXd x(total, d);
  Eigen::VectorXd y(total);
  BoHistory h;

  auto evaluate = [&](const HyperPoint& theta, bool design) {
    double value;
    try {
      value = objective(theta);
    } catch (const std::exception& e) {
      throw Error(ErrorCode::kObjectiveFailure,
                  "objective failed at theta = " + format_theta(theta) + ": " + e.what());
    }
    if (!std::isfinite(value)) {
      throw Error(ErrorCode::kObjectiveFailure,
                  "objective returned a non-finite value at theta = " + format_theta(theta));
    }
    const auto t = static_cast<Eigen::Index>(h.rows.size());
    x.row(t) = theta.transpose();
    y(t) = value;
    h.rows.push_back({static_cast<int>(t) + 1, theta, value, design});
    if (t == 0 || value > h.best_value) {
      h.best_value = value;
      h.best_theta = theta;
      h.best_round = static_cast<int>(t) + 1;
    }
  };

  RngStream design_rng = rng.substream(0);
  const Eigen::MatrixXd design = space_filling_design(domain, options.init_n, design_rng);
  for (Eigen::Index i = 0; i < design.rows(); ++i) evaluate(design.row(i).transpose(), true);

  for (int it = 0; it < options.iters; ++it) {
    const Eigen::Index t = static_cast<Eigen::Index>(h.rows.size());
    const Eigen::MatrixXd xs = x.topRows(t);
    const Eigen::VectorXd ys = y.head(t);
    const GpHyperparameters hp = fit_gp_hyperparameters(xs, ys, domain);
    const GpSurrogate s(domain, xs, ys, hp.kernel, hp.noise_variance);
    RngStream round_rng = rng.substream(static_cast<std::uint64_t>(it) + 1);
    evaluate(propose_next(s, domain, options.kappa, round_rng), false);
  }
  return h;
}

}  // namespace bayes_epi
