#pragma once

#include <Eigen/Dense>

namespace bayes_epi {

/// Lower-triangular factor L with L * L^T equal to the factored matrix
/// (plus `jitter` on the diagonal when escalation was needed).
struct CholeskyFactor {
  Eigen::MatrixXd lower;
  double jitter = 0.0;

  Eigen::Index dim() const { return lower.rows(); }
  Eigen::MatrixXd reconstruct() const { return lower * lower.transpose(); }
  double log_determinant() const;
};

/// Dense Cholesky with jitter escalation: on pivot failure the diagonal is
/// loaded with 1e-10 * trace/dim, doubling up to 1e-6 * trace/dim before
/// giving up with NotPositiveDefinite.
CholeskyFactor cholesky(const Eigen::MatrixXd& m);

/// Solves (L L^T) x = b.
Eigen::VectorXd solve_spd(const CholeskyFactor& f, const Eigen::VectorXd& b);
/// Column-wise solve for a right-hand-side matrix.
Eigen::MatrixXd solve_spd_columns(const CholeskyFactor& f, const Eigen::MatrixXd& b);

/// L^{-1} b (forward substitution only).
Eigen::VectorXd solve_lower(const CholeskyFactor& f, const Eigen::VectorXd& b);

/// Inverse of the factored matrix, symmetrized.
Eigen::MatrixXd spd_inverse(const CholeskyFactor& f);

/// 1/(1+e^{-z}) evaluated so that sigmoid(z) + sigmoid(-z) == 1 exactly.
double stable_sigmoid(double z);

/// log(1 + e^z) without overflow or cancellation.
double log1pexp(double z);

double logit(double p);

}  // namespace bayes_epi
