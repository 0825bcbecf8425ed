#pragma once

#include <optional>

#include <Eigen/Dense>

#include "bayes_epi/datagen.hpp"
#include "bayes_epi/rng.hpp"

namespace bayes_epi {

/// Elastic-net Cox settings. The fitted objective is
///   NLL(beta) / n + lambda * (alpha * |beta|_1 + (1 - alpha) * |beta|_2^2 / 2)
/// on standardized covariates, NLL being the Breslow negative log partial likelihood.
struct CoxFitConfig {
  double lambda = 0.0;
  double alpha = 1.0;
  int max_iter = 50;
  double tol = 1e-9;  // KKT residual on the scaled objective

  void validate() const;
};

/// Column centering and scaling (population sd); constant columns keep scale 1.
struct Standardization {
  Eigen::VectorXd center;
  Eigen::VectorXd scale;

  static Standardization fit(const Eigen::MatrixXd& x);
  static Standardization identity(Eigen::Index p);
  Eigen::MatrixXd apply(const Eigen::MatrixXd& x) const;
};

struct CoxFit {
  Eigen::VectorXd beta;  // standardized scale
  CoxFitConfig config;
  bool converged = false;
  Eigen::Index active_set_size = 0;
  Standardization standardization;
  int iterations = 0;
  double objective = 0.0;
  double kkt_violation = 0.0;
};

struct PartialLikelihood {
  double value = 0.0;
  Eigen::VectorXd gradient;
};

/// Breslow negative log partial likelihood (unscaled) and its gradient,
/// accumulated over risk sets in one descending-time pass.
PartialLikelihood cox_neg_log_plik(const Eigen::VectorXd& beta, const Eigen::MatrixXd& x,
                                   const Eigen::VectorXd& time, const Eigen::VectorXi& event);
PartialLikelihood cox_neg_log_plik(const Eigen::VectorXd& beta, const SurvivalData& data);

/// Hessian of the unscaled negative log partial likelihood.
Eigen::MatrixXd cox_neg_log_plik_hessian(const Eigen::VectorXd& beta, const Eigen::MatrixXd& x,
                                         const Eigen::VectorXd& time,
                                         const Eigen::VectorXi& event);

/// Penalized objective (see CoxFitConfig) for covariates already on the fitting scale.
double coxnet_objective(const Eigen::VectorXd& beta, const Eigen::MatrixXd& x,
                        const Eigen::VectorXd& time, const Eigen::VectorXi& event, double lambda,
                        double alpha);

/// Largest KKT residual of the penalized objective at beta.
double coxnet_kkt_violation(const Eigen::VectorXd& beta, const Eigen::MatrixXd& x,
                            const Eigen::VectorXd& time, const Eigen::VectorXi& event,
                            double lambda, double alpha);

/// Smallest lambda whose fit is identically zero; alpha below 1e-3 is treated as 1e-3.
double lambda_max(const SurvivalData& data, double alpha);

/// Proximal Newton: quadratic model of the partial likelihood, cyclic
/// coordinate descent with soft-thresholding on the model, backtracking on
/// the true objective. Non-convergence is flagged, not thrown.
CoxFit fit_coxnet(const SurvivalData& data, const CoxFitConfig& config,
                  const std::optional<Eigen::VectorXd>& warm_start = std::nullopt);

/// Linear predictor on the fit's standardization scale.
Eigen::VectorXd predict_risk(const CoxFit& fit, const Eigen::MatrixXd& x_new);

struct CvResult {
  Eigen::VectorXd lambda_path;  // descending
  Eigen::VectorXd mean_cv_metric;
  double best_lambda = 0.0;
  Eigen::Index best_index = 0;
  int folds = 0;
};

/// Lasso (alpha = 1) path from lambda_max down to 1e-3 * lambda_max, scored by
/// held-out C-index averaged over folds.
CvResult cv_tune_lasso(const SurvivalData& data, RngStream& rng, int folds = 5,
                       int path_len = 50);

/// Validation C-index of an elastic-net fit; 0.5 when every risk ties.
double validation_c_index(const SurvivalData& train, const SurvivalData& val, double lambda,
                          double alpha);

}  // namespace bayes_epi
