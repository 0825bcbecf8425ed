#include "bayes_epi/coxnet.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "bayes_epi/error.hpp"
#include "bayes_epi/kernels.hpp"
#include "bayes_epi/metrics.hpp"

namespace bayes_epi {
namespace {

constexpr double kMinAlphaForLambdaMax = 1e-3;
constexpr int kMaxHalvings = 30;
constexpr int kMaxSweeps = 10000;

// Subjects grouped by distinct time, latest first; each group enters the risk
// set before its events are scored (Breslow).
struct RiskOrder {
  std::vector<Eigen::Index> order;
  std::vector<std::size_t> group_end;  // exclusive ends into `order`
};

RiskOrder make_order(const Eigen::VectorXd& time) {
  RiskOrder r;
  r.order.resize(static_cast<std::size_t>(time.size()));
  std::iota(r.order.begin(), r.order.end(), Eigen::Index{0});
  std::stable_sort(r.order.begin(), r.order.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return time(a) > time(b); });
  for (std::size_t k = 1; k <= r.order.size(); ++k) {
    if (k == r.order.size() || time(r.order[k]) != time(r.order[k - 1])) r.group_end.push_back(k);
  }
  return r;
}

void check_inputs(const Eigen::VectorXd& beta, const Eigen::MatrixXd& x,
                  const Eigen::VectorXd& time, const Eigen::VectorXi& event) {
  if (x.rows() != time.size() || time.size() != event.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "survival inputs have different lengths");
  }
  if (beta.size() != x.cols()) throw Error(ErrorCode::kDimensionMismatch, "beta length");
  if (event.sum() == 0) throw Error(ErrorCode::kNoEvents, "no events in survival data");
}

struct Derivatives {
  double value = 0.0;
  Eigen::VectorXd gradient;
  Eigen::MatrixXd hessian;
};

// One descending pass with running sums S0 = sum w, S1 = sum w x, S2 = sum w x x'.
// Weights are shifted by max(eta) to avoid overflow.
Derivatives partial_likelihood(const Eigen::VectorXd& beta, const Eigen::MatrixXd& x,
                               const Eigen::VectorXi& event,
                               const RiskOrder& ord, bool with_hessian) {
  const Eigen::Index p = x.cols();
  const Eigen::VectorXd eta = x * beta;
  const double shift = eta.size() > 0 ? eta.maxCoeff() : 0.0;
  Derivatives d;
  d.gradient = Eigen::VectorXd::Zero(p);
  if (with_hessian) d.hessian = Eigen::MatrixXd::Zero(p, p);
  double s0 = 0.0;
  Eigen::VectorXd s1 = Eigen::VectorXd::Zero(p);
  Eigen::MatrixXd s2;
  if (with_hessian) s2 = Eigen::MatrixXd::Zero(p, p);
  std::size_t start = 0;
  for (const std::size_t end : ord.group_end) {
    int events = 0;
    Eigen::VectorXd event_x = Eigen::VectorXd::Zero(p);
    double event_eta = 0.0;
    for (std::size_t k = start; k < end; ++k) {
      const Eigen::Index i = ord.order[k];
      const double w = std::exp(eta(i) - shift);
      s0 += w;
      s1.noalias() += w * x.row(i).transpose();
      if (with_hessian) s2.noalias() += w * x.row(i).transpose() * x.row(i);
      if (event(i) == 1) {
        ++events;
        event_x += x.row(i).transpose();
        event_eta += eta(i);
      }
    }
    if (events > 0) {
      const double m = static_cast<double>(events);
      const Eigen::VectorXd mean_x = s1 / s0;
      d.value += m * (std::log(s0) + shift) - event_eta;
      d.gradient += m * mean_x - event_x;
      if (with_hessian) d.hessian += m * (s2 / s0 - mean_x * mean_x.transpose());
    }
    start = end;
  }
  return d;
}

double penalty(const Eigen::VectorXd& beta, double lambda, double alpha) {
  return lambda * (alpha * beta.lpNorm<1>() + 0.5 * (1.0 - alpha) * beta.squaredNorm());
}

double kkt_from_gradient(const Eigen::VectorXd& beta, const Eigen::VectorXd& g, double lambda,
                         double alpha) {
  double worst = 0.0;
  for (Eigen::Index j = 0; j < beta.size(); ++j) {
    const double smooth = g(j) + lambda * (1.0 - alpha) * beta(j);
    double r;
    if (beta(j) != 0.0) {
      r = std::fabs(smooth + lambda * alpha * (beta(j) > 0.0 ? 1.0 : -1.0));
    } else {
      r = std::max(0.0, std::fabs(smooth) - lambda * alpha);
    }
    worst = std::max(worst, r);
  }
  return worst;
}

double soft_threshold(double z, double t) {
  if (z > t) return z - t;
  if (z < -t) return z + t;
  return 0.0;
}

// Fitting problem on standardized covariates; objective scaled by 1/n.
class CoxProblem {
 public:
  CoxProblem(Eigen::MatrixXd x, const Eigen::VectorXd& time, const Eigen::VectorXi& event)
      : x_(std::move(x)), event_(event), order_(make_order(time)),
        inv_n_(1.0 / static_cast<double>(time.size())) {}

  Derivatives derivatives(const Eigen::VectorXd& beta, bool hessian) const {
    Derivatives d = partial_likelihood(beta, x_, event_, order_, hessian);
    d.value *= inv_n_;
    d.gradient *= inv_n_;
    if (hessian) d.hessian *= inv_n_;
    return d;
  }

  double smooth_value(const Eigen::VectorXd& beta) const {
    return derivatives(beta, false).value;
  }

  Eigen::Index dim() const { return x_.cols(); }

 private:
  Eigen::MatrixXd x_;
  Eigen::VectorXi event_;
  RiskOrder order_;
  double inv_n_;
};

struct SolveResult {
  Eigen::VectorXd beta;
  bool converged = false;
  int iterations = 0;
  double objective = 0.0;
  double kkt = 0.0;
};

// Minimizes g'(b - b0) + (b - b0)'H(b - b0)/2 + penalty(b) by cyclic coordinate descent.
Eigen::VectorXd solve_quadratic_model(const Eigen::VectorXd& b0, const Eigen::VectorXd& g,
                                      const Eigen::MatrixXd& h, double lambda, double alpha) {
  const Eigen::Index p = b0.size();
  Eigen::VectorXd b = b0;
  Eigen::VectorXd h_delta = Eigen::VectorXd::Zero(p);  // H (b - b0)
  const double l1 = lambda * alpha;
  const double l2 = lambda * (1.0 - alpha);
  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    double max_change = 0.0;
    for (Eigen::Index j = 0; j < p; ++j) {
      const double denom = h(j, j) + l2;
      double next = 0.0;
      if (denom > 0.0) {
        const double z = h(j, j) * b(j) - (g(j) + h_delta(j));
        next = soft_threshold(z, l1) / denom;
      }
      const double change = next - b(j);
      if (change != 0.0) {
        h_delta += h.col(j) * change;
        b(j) = next;
        max_change = std::max(max_change, std::fabs(change));
      }
    }
    if (max_change <= 1e-15 * (1.0 + b.lpNorm<Eigen::Infinity>())) break;
  }
  return b;
}

SolveResult solve(const CoxProblem& prob, double lambda, double alpha, const CoxFitConfig& cfg,
                  Eigen::VectorXd beta) {
  SolveResult r;
  Derivatives d = prob.derivatives(beta, true);
  double f = d.value + penalty(beta, lambda, alpha);
  r.kkt = kkt_from_gradient(beta, d.gradient, lambda, alpha);
  for (int it = 0; it < cfg.max_iter && r.kkt > cfg.tol; ++it) {
    r.iterations = it + 1;
    const Eigen::VectorXd target = solve_quadratic_model(beta, d.gradient, d.hessian, lambda, alpha);
    const Eigen::VectorXd dir = target - beta;
    if (dir.lpNorm<Eigen::Infinity>() == 0.0) break;
    const double predicted = d.gradient.dot(dir) + penalty(target, lambda, alpha) -
                             penalty(beta, lambda, alpha);
    double t = 1.0;
    bool accepted = false;
    Eigen::VectorXd next;
    double f_next = f;
    for (int k = 0; k <= kMaxHalvings; ++k, t *= 0.5) {
      next = beta + t * dir;
      f_next = prob.smooth_value(next) + penalty(next, lambda, alpha);
      if (f_next <= f + 1e-4 * t * std::min(predicted, 0.0)) {
        accepted = true;
        break;
      }
    }
    if (!accepted || f_next > f) break;
    beta = next;
    f = f_next;
    d = prob.derivatives(beta, true);
    r.kkt = kkt_from_gradient(beta, d.gradient, lambda, alpha);
  }
  r.converged = r.kkt <= cfg.tol;
  r.beta = std::move(beta);
  r.objective = f;
  return r;
}

CoxFit make_fit(const SolveResult& s, const CoxFitConfig& cfg, Standardization st) {
  CoxFit fit;
  fit.beta = s.beta;
  fit.config = cfg;
  fit.converged = s.converged;
  fit.iterations = s.iterations;
  fit.objective = s.objective;
  fit.kkt_violation = s.kkt;
  fit.active_set_size = (s.beta.array() != 0.0).count();
  fit.standardization = std::move(st);
  return fit;
}

}  // namespace

void CoxFitConfig::validate() const {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw Error(ErrorCode::kInvalidConfig, "lambda must be finite and nonnegative");
  }
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw Error(ErrorCode::kInvalidConfig, "alpha outside [0,1]");
  if (max_iter < 1) throw Error(ErrorCode::kInvalidConfig, "max_iter must be positive");
}

Standardization Standardization::fit(const Eigen::MatrixXd& x) {
  Standardization s;
  const double n = static_cast<double>(x.rows());
  s.center = x.colwise().mean().transpose();
  s.scale.resize(x.cols());
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    const double var = (x.col(j).array() - s.center(j)).square().sum() / n;
    s.scale(j) = var > 0.0 ? std::sqrt(var) : 1.0;
  }
  return s;
}

Standardization Standardization::identity(Eigen::Index p) {
  return {Eigen::VectorXd::Zero(p), Eigen::VectorXd::Ones(p)};
}

Eigen::MatrixXd Standardization::apply(const Eigen::MatrixXd& x) const {
  if (x.cols() != center.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "covariate count differs from training data");
  }
  return (x.rowwise() - center.transpose()).array().rowwise() / scale.transpose().array();
}

PartialLikelihood cox_neg_log_plik(const Eigen::VectorXd& beta, const Eigen::MatrixXd& x,
                                   const Eigen::VectorXd& time, const Eigen::VectorXi& event) {
  check_inputs(beta, x, time, event);
  Derivatives d = partial_likelihood(beta, x, event, make_order(time), false);
  return {d.value, std::move(d.gradient)};
}

PartialLikelihood cox_neg_log_plik(const Eigen::VectorXd& beta, const SurvivalData& data) {
  return cox_neg_log_plik(beta, data.x, data.time, data.event);
}

Eigen::MatrixXd cox_neg_log_plik_hessian(const Eigen::VectorXd& beta, const Eigen::MatrixXd& x,
                                         const Eigen::VectorXd& time,
                                         const Eigen::VectorXi& event) {
  check_inputs(beta, x, time, event);
  return partial_likelihood(beta, x, event, make_order(time), true).hessian;
}

double coxnet_objective(const Eigen::VectorXd& beta, const Eigen::MatrixXd& x,
                        const Eigen::VectorXd& time, const Eigen::VectorXi& event, double lambda,
                        double alpha) {
  const PartialLikelihood pl = cox_neg_log_plik(beta, x, time, event);
  return pl.value / static_cast<double>(time.size()) + penalty(beta, lambda, alpha);
}

double coxnet_kkt_violation(const Eigen::VectorXd& beta, const Eigen::MatrixXd& x,
                            const Eigen::VectorXd& time, const Eigen::VectorXi& event,
                            double lambda, double alpha) {
  const PartialLikelihood pl = cox_neg_log_plik(beta, x, time, event);
  return kkt_from_gradient(beta, pl.gradient / static_cast<double>(time.size()), lambda, alpha);
}

double lambda_max(const SurvivalData& data, double alpha) {
  const Eigen::MatrixXd z = Standardization::fit(data.x).apply(data.x);
  const PartialLikelihood pl =
      cox_neg_log_plik(Eigen::VectorXd::Zero(z.cols()), z, data.time, data.event);
  const double g = pl.gradient.lpNorm<Eigen::Infinity>() / static_cast<double>(data.size());
  return g / std::max(alpha, kMinAlphaForLambdaMax);
}

CoxFit fit_coxnet(const SurvivalData& data, const CoxFitConfig& config,
                  const std::optional<Eigen::VectorXd>& warm_start) {
  config.validate();
  data.validate();
  if (data.event_count() == 0) throw Error(ErrorCode::kNoEvents, "no events in training data");
  Standardization st = Standardization::fit(data.x);
  const CoxProblem prob(st.apply(data.x), data.time, data.event);
  Eigen::VectorXd start = Eigen::VectorXd::Zero(data.x.cols());
  if (warm_start) {
    if (warm_start->size() != start.size()) {
      throw Error(ErrorCode::kDimensionMismatch, "warm start length");
    }
    start = *warm_start;
  }
  const SolveResult s = solve(prob, config.lambda, config.alpha, config, start);
  return make_fit(s, config, std::move(st));
}

Eigen::VectorXd predict_risk(const CoxFit& fit, const Eigen::MatrixXd& x_new) {
  if (x_new.cols() != fit.beta.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "covariate count differs from the fit");
  }
  return fit.standardization.apply(x_new) * fit.beta;
}

double validation_c_index(const SurvivalData& train, const SurvivalData& val, double lambda,
                          double alpha) {
  CoxFitConfig cfg;
  cfg.lambda = lambda;
  cfg.alpha = alpha;
  const CoxFit fit = fit_coxnet(train, cfg);
  return c_index(predict_risk(fit, val.x), val.time, val.event);
}

CvResult cv_tune_lasso(const SurvivalData& data, RngStream& rng, int folds, int path_len) {
  data.validate();
  const Eigen::Index n = data.size();
  if (folds < 2 || folds > n) throw Error(ErrorCode::kInvalidConfig, "folds must lie in [2, n]");
  if (path_len < 2) throw Error(ErrorCode::kInvalidConfig, "path_len must be at least 2");
  if (data.event_count() == 0) throw Error(ErrorCode::kNoEvents, "no events in survival data");

  // Every training complement must keep an event; reshuffle a bounded number of times.
  std::vector<int> fold_of(static_cast<std::size_t>(n));
  bool ok = false;
  for (int attempt = 0; attempt < 10 && !ok; ++attempt) {
    std::vector<Eigen::Index> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), Eigen::Index{0});
    rng.shuffle(perm.begin(), perm.end());
    for (std::size_t k = 0; k < perm.size(); ++k) {
      fold_of[static_cast<std::size_t>(perm[k])] = static_cast<int>(k % static_cast<std::size_t>(folds));
    }
    std::vector<Eigen::Index> held_out_events(static_cast<std::size_t>(folds), 0);
    for (Eigen::Index i = 0; i < n; ++i) {
      held_out_events[static_cast<std::size_t>(fold_of[static_cast<std::size_t>(i)])] += data.event(i);
    }
    ok = std::all_of(held_out_events.begin(), held_out_events.end(),
                     [&](Eigen::Index e) { return e < data.event_count(); });
  }
  if (!ok) throw Error(ErrorCode::kFoldWithoutEvents, "a training fold has no events");

  CvResult result;
  result.folds = folds;
  const double lmax = lambda_max(data, 1.0);
  result.lambda_path.resize(path_len);
  for (int m = 0; m < path_len; ++m) {
    result.lambda_path(m) = lmax * std::pow(1e-3, static_cast<double>(m) / (path_len - 1));
  }

  Eigen::MatrixXd fold_metric = Eigen::MatrixXd::Zero(folds, path_len);
  std::vector<bool> fold_scored(static_cast<std::size_t>(folds), false);
  Eigen::MatrixXd pooled_risk(n, path_len);
  for (int f = 0; f < folds; ++f) {
    std::vector<Eigen::Index> train_rows, test_rows;
    for (Eigen::Index i = 0; i < n; ++i) {
      (fold_of[static_cast<std::size_t>(i)] == f ? test_rows : train_rows).push_back(i);
    }
    const SurvivalData train = subset(data, train_rows);
    const SurvivalData test = subset(data, test_rows);
    Eigen::VectorXd warm = Eigen::VectorXd::Zero(data.x.cols());
    for (int m = 0; m < path_len; ++m) {
      CoxFitConfig cfg;
      cfg.lambda = result.lambda_path(m);
      cfg.alpha = 1.0;
      const CoxFit fit = fit_coxnet(train, cfg, warm);
      warm = fit.beta;
      const Eigen::VectorXd risk = predict_risk(fit, test.x);
      for (std::size_t k = 0; k < test_rows.size(); ++k) {
        pooled_risk(test_rows[k], m) = risk(static_cast<Eigen::Index>(k));
      }
      const auto counts = kernels::concordance_counts(risk, test.time, test.event);
      if (counts.comparable > 0) {
        fold_metric(f, m) = counts.value();
        fold_scored[static_cast<std::size_t>(f)] = true;
      }
    }
  }

  result.mean_cv_metric.resize(path_len);
  const auto scored = std::count(fold_scored.begin(), fold_scored.end(), true);
  for (int m = 0; m < path_len; ++m) {
    if (scored > 0) {
      double s = 0.0;
      for (int f = 0; f < folds; ++f) {
        if (fold_scored[static_cast<std::size_t>(f)]) s += fold_metric(f, m);
      }
      result.mean_cv_metric(m) = s / static_cast<double>(scored);
    } else {
      // Folds too small to hold a comparable pair (e.g. leave-one-out): score
      // the pooled out-of-fold predictions instead.
      result.mean_cv_metric(m) = c_index(pooled_risk.col(m), data.time, data.event);
    }
  }
  result.mean_cv_metric.maxCoeff(&result.best_index);
  result.best_lambda = result.lambda_path(result.best_index);
  return result;
}

}  // namespace bayes_epi
