#pragma once

#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "bayes_epi/numerics.hpp"
#include "bayes_epi/rng.hpp"

namespace bayes_epi {

/// Axis-aligned search box, lower < upper in every coordinate.
struct Domain {
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;

  Eigen::Index dim() const { return lower.size(); }
  void validate() const;
  bool contains(const Eigen::VectorXd& theta) const;
  Eigen::VectorXd to_unit(const Eigen::VectorXd& theta) const;
  Eigen::VectorXd from_unit(const Eigen::VectorXd& u) const;

  static Domain unit(Eigen::Index d);
};

using HyperPoint = Eigen::VectorXd;

/// Squared-exponential kernel v * exp(-0.5 * sum_k (u_k - u'_k)^2 / l_k^2) on
/// unit-box coordinates u.
struct KernelParams {
  Eigen::VectorXd lengthscales;
  double variance = 1.0;

  void validate(Eigen::Index d) const;
};

/// Conditioned GP. Immutable once built; safe to query concurrently.
class GpSurrogate {
 public:
  GpSurrogate(Domain domain, Eigen::MatrixXd x_obs, Eigen::VectorXd y_obs, KernelParams kernel,
              double noise_variance);

  struct Prediction {
    double mean = 0.0;
    double sd = 0.0;
  };

  Prediction posterior(const HyperPoint& theta) const;
  double kernel(const Eigen::VectorXd& unit_a, const Eigen::VectorXd& unit_b) const;

  const Domain& domain() const { return domain_; }
  const Eigen::MatrixXd& x_obs() const { return x_obs_; }
  const Eigen::VectorXd& y_obs() const { return y_obs_; }
  const Eigen::MatrixXd& unit_obs() const { return unit_obs_; }
  const KernelParams& kernel_params() const { return kernel_; }
  double noise_variance() const { return noise_; }
  double y_mean() const { return y_mean_; }
  const CholeskyFactor& gram_chol() const { return gram_chol_; }
  Eigen::Index size() const { return x_obs_.rows(); }

 private:
  Domain domain_;
  Eigen::MatrixXd x_obs_;  // T x d, original coordinates
  Eigen::VectorXd y_obs_;
  Eigen::MatrixXd unit_obs_;
  KernelParams kernel_;
  double noise_;
  double y_mean_ = 0.0;
  CholeskyFactor gram_chol_;
  Eigen::VectorXd alpha_;  // (K + noise I)^{-1} (y - mean)
};

/// Rows of `x_obs` are points; the default domain is the unit box.
GpSurrogate gp_condition(const Eigen::MatrixXd& x_obs, const Eigen::VectorXd& y_obs,
                         const KernelParams& kernel, double noise_variance);
GpSurrogate gp_condition(const Eigen::MatrixXd& x_obs, const Eigen::VectorXd& y_obs,
                         const KernelParams& kernel, double noise_variance, const Domain& domain);

GpSurrogate::Prediction gp_posterior(const GpSurrogate& s, const HyperPoint& theta);

double ucb(const GpSurrogate& s, const HyperPoint& theta, double kappa);

/// Log marginal likelihood of the centered observations.
double log_marginal_likelihood(const GpSurrogate& s);

struct GpHyperparameters {
  KernelParams kernel;
  double noise_variance = 0.0;
  double log_marginal_likelihood = 0.0;
};

/// Multi-start coordinate search in log space over lengthscale [0.05, 2],
/// variance [1e-4, 4] and noise [1e-6, 1].
GpHyperparameters fit_gp_hyperparameters(const Eigen::MatrixXd& x_obs, const Eigen::VectorXd& y_obs,
                                         const Domain& domain);

/// n points of a randomly shifted Halton sequence in the unit box.
Eigen::MatrixXd halton_points(Eigen::Index n, Eigen::Index d, RngStream& rng);

/// Space-filling initial design mapped into the domain (rows are points).
Eigen::MatrixXd space_filling_design(const Domain& domain, Eigen::Index n, RngStream& rng);

struct ProposeOptions {
  int candidates = 2048;
  int refine_starts = 5;
  double initial_step = 0.05;  // unit-box units
  double min_step = 1e-4;
  double duplicate_tol = 1e-6;
};

/// Approximate UCB argmax: scored quasi-random candidates, then pattern search
/// from the best few. Points within `duplicate_tol` of an observation are skipped.
HyperPoint propose_next(const GpSurrogate& s, const Domain& domain, double kappa, RngStream& rng,
                        const ProposeOptions& options = {});

struct BoRow {
  int round = 0;  // 1-based, design rows included
  HyperPoint theta;
  double value = 0.0;
  bool is_design = false;
};

struct BoHistory {
  std::vector<BoRow> rows;
  int best_round = 0;
  HyperPoint best_theta;
  double best_value = 0.0;

  /// max over the first t rows, for t = 1..rows.size().
  std::vector<double> running_best() const;
};

struct BoOptions {
  int init_n = 5;
  int iters = 15;
  double kappa = 2.576;
};

using Objective = std::function<double(const HyperPoint&)>;

/// Sequential UCB optimization; kernel hyperparameters are refit before every
/// proposal. Evaluation errors and non-finite values raise ObjectiveFailure.
BoHistory bo_run(const Objective& objective, const Domain& domain, const BoOptions& options,
                 RngStream& rng);

}  // namespace bayes_epi
