#pragma once

#include <Eigen/Dense>

#include "bayes_epi/datagen.hpp"
#include "bayes_epi/kernels.hpp"
#include "bayes_epi/numerics.hpp"
#include "bayes_epi/rng.hpp"

namespace bayes_epi {

/// Independent Gaussian prior sds: intercept_sd for beta_0, coef_sd for the rest.
struct PriorSpec {
  double intercept_sd = 2.5;
  double coef_sd = 2.5;

  void validate() const;
  Eigen::VectorXd precision(Eigen::Index dim) const;
};

struct NewtonOptions {
  int max_iter = 100;
  double tol = 1e-8;
};

struct LaplacePosterior {
  Eigen::VectorXd map;     // intercept first
  CholeskyFactor cov_chol;  // factor of the inverse Hessian at the mode
  Eigen::Index n_obs = 0;
  bool converged = false;
  int iterations = 0;

  Eigen::MatrixXd covariance() const { return cov_chol.reconstruct(); }
};

/// Point estimate from the unpenalized likelihood.
struct LogisticFit {
  Eigen::VectorXd coef;
  bool converged = false;
  bool capped = false;  // hit the divergence cap (quasi-separation)
  int iterations = 0;
};

struct PredictiveDraws {
  Eigen::VectorXd mean;
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
  int draws_per_point = 0;
  double level = 0.0;
  Eigen::MatrixXd coef_draws;  // (p+1) x S
  Eigen::MatrixXd samples;     // n x S probabilities, only when requested
};

/// Log posterior  sum_i [y_i eta_i - log(1+e^eta_i)] - beta' P beta / 2  with
/// P = diag(precision); precision zero gives the plain log-likelihood.
class LogisticObjective {
 public:
  LogisticObjective(const Eigen::MatrixXd& design, const Eigen::VectorXi& y,
                    Eigen::VectorXd precision);

  double value(const Eigen::VectorXd& beta) const;
  Eigen::VectorXd gradient(const Eigen::VectorXd& beta) const;
  /// Negative Hessian X' W X + P (positive definite for a proper prior).
  Eigen::MatrixXd neg_hessian(const Eigen::VectorXd& beta) const;

  Eigen::Index dim() const { return design_.cols(); }

 private:
  const Eigen::MatrixXd& design_;
  Eigen::VectorXd y_;
  Eigen::VectorXd precision_;
};

Eigen::MatrixXd with_intercept(const Eigen::MatrixXd& x);

/// Newton-Raphson MAP with step halving, plus the Laplace covariance.
LaplacePosterior fit_map(const LabeledDataset& data, const PriorSpec& prior,
                         const NewtonOptions& options = {});

/// Unregularized Newton-Raphson; coefficient max-norm is capped at `cap`,
/// beyond which the fit is returned non-converged.
LogisticFit fit_mle(const LabeledDataset& data, const NewtonOptions& options = {},
                    double cap = 30.0);
LogisticFit fit_mle_design(const Eigen::MatrixXd& design, const Eigen::VectorXi& y,
                           const NewtonOptions& options = {}, double cap = 30.0);

/// Plug-in probabilities sigma([1 x] . coef).
Eigen::VectorXd predict_probs(const Eigen::VectorXd& coef, const Eigen::MatrixXd& x);

/// S draws beta^(s) = map + L z^(s); per-row mean of sigma and empirical
/// interval at `level`.
PredictiveDraws posterior_predict(const LaplacePosterior& post, const Eigen::MatrixXd& x_new,
                                  int draws, double level, RngStream& rng,
                                  bool keep_samples = false);

/// Coefficient draws only, (p+1) x S.
Eigen::MatrixXd sample_coefficients(const LaplacePosterior& post, int draws, RngStream& rng);

}  // namespace bayes_epi
