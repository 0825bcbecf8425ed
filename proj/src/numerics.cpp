#include "bayes_epi/numerics.hpp"

#include <cmath>
#include <optional>
#include <string>

#include "bayes_epi/error.hpp"

namespace bayes_epi {
namespace {

constexpr double kSymmetryTol = 1e-12;
constexpr double kJitterStart = 1e-10;
constexpr double kJitterMax = 1e-6;

std::optional<Eigen::MatrixXd> try_factor(const Eigen::MatrixXd& m, double jitter) {
  const Eigen::Index n = m.rows();
  Eigen::MatrixXd l = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    double diag = m(j, j) + jitter;
    for (Eigen::Index k = 0; k < j; ++k) diag -= l(j, k) * l(j, k);
    if (!(diag > 0.0) || !std::isfinite(diag)) return std::nullopt;
    const double ljj = std::sqrt(diag);
    l(j, j) = ljj;
    for (Eigen::Index i = j + 1; i < n; ++i) {
      double s = m(i, j);
      for (Eigen::Index k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
      l(i, j) = s / ljj;
    }
  }
  return l;
}

void check_dim(const CholeskyFactor& f, Eigen::Index rows) {
  if (rows != f.dim()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "right-hand side has " + std::to_string(rows) + " rows, factor has dimension " +
                    std::to_string(f.dim()));
  }
}

}  // namespace

double CholeskyFactor::log_determinant() const {
  return 2.0 * lower.diagonal().array().log().sum();
}

CholeskyFactor cholesky(const Eigen::MatrixXd& m) {
  if (m.rows() != m.cols() || m.rows() == 0) {
    throw Error(ErrorCode::kDimensionMismatch, "cholesky needs a non-empty square matrix");
  }
  const double scale = m.cwiseAbs().maxCoeff();
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > kSymmetryTol * std::max(scale, 1.0)) {
    throw Error(ErrorCode::kNotPositiveDefinite, "matrix is not symmetric");
  }
  if (auto l = try_factor(m, 0.0)) return {std::move(*l), 0.0};

  const double mean_diag = m.trace() / static_cast<double>(m.rows());
  if (mean_diag > 0.0) {
    for (double rel = kJitterStart; rel <= kJitterMax * (1.0 + 1e-12); rel *= 2.0) {
      const double jitter = rel * mean_diag;
      if (auto l = try_factor(m, jitter)) return {std::move(*l), jitter};
    }
  }
  throw Error(ErrorCode::kNotPositiveDefinite,
              "pivot failure after jitter escalation (dim " + std::to_string(m.rows()) + ")");
}

Eigen::VectorXd solve_lower(const CholeskyFactor& f, const Eigen::VectorXd& b) {
  check_dim(f, b.size());
  return f.lower.triangularView<Eigen::Lower>().solve(b);
}

Eigen::VectorXd solve_spd(const CholeskyFactor& f, const Eigen::VectorXd& b) {
  check_dim(f, b.size());
  Eigen::VectorXd y = f.lower.triangularView<Eigen::Lower>().solve(b);
  return f.lower.transpose().triangularView<Eigen::Upper>().solve(y);
}

Eigen::MatrixXd solve_spd_columns(const CholeskyFactor& f, const Eigen::MatrixXd& b) {
  check_dim(f, b.rows());
  Eigen::MatrixXd y = f.lower.triangularView<Eigen::Lower>().solve(b);
  return f.lower.transpose().triangularView<Eigen::Upper>().solve(y);
}

Eigen::MatrixXd spd_inverse(const CholeskyFactor& f) {
  Eigen::MatrixXd inv = solve_spd_columns(f, Eigen::MatrixXd::Identity(f.dim(), f.dim()));
  return 0.5 * (inv + inv.transpose());
}

double stable_sigmoid(double z) {
  // Both halves use the same e^{-|z|}; for z < 0 the result is 1 - sigmoid(-z)
  // computed from the identical intermediate, so the pair sums to one.
  const double e = std::exp(-std::fabs(z));
  const double pos = 1.0 / (1.0 + e);
  return z >= 0.0 ? pos : 1.0 - pos;
}

double log1pexp(double z) {
  if (z > 35.0) return z + std::exp(-z);
  if (z > -37.0) return std::log1p(std::exp(z));
  return std::exp(z);
}

double logit(double p) { return std::log(p) - std::log1p(-p); }

}  // namespace bayes_epi
