#pragma once

// Data-parallel inner loops. Each kernel has an OpenMP version and a serial
// reference with the same per-element arithmetic; results are bitwise equal
// for any thread count (reductions are either integer or per-output-element).

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

namespace bayes_epi::kernels {

struct PredictiveSummary {
  Eigen::VectorXd mean;
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
  Eigen::MatrixXd samples;  // n x S, empty unless requested
};

/// Row-wise summary of sigmoid(design * draws). `design` is n x (p+1) with the
/// intercept column, `draws` is (p+1) x S. Interval bounds are the empirical
/// (1-level)/2 and 1-(1-level)/2 quantiles (linear interpolation, R type 7).
PredictiveSummary predictive_summary(const Eigen::MatrixXd& design, const Eigen::MatrixXd& draws,
                                     double level, bool keep_samples = false);
PredictiveSummary predictive_summary_serial(const Eigen::MatrixXd& design,
                                            const Eigen::MatrixXd& draws, double level,
                                            bool keep_samples = false);

struct PairCounts {
  std::int64_t concordant = 0;
  std::int64_t tied = 0;
  std::int64_t comparable = 0;

  /// (concordant + tied/2) / comparable; caller must check comparable > 0.
  double value() const {
    return (static_cast<double>(concordant) + 0.5 * static_cast<double>(tied)) /
           static_cast<double>(comparable);
  }
};

/// Harrell pair counts over (i, j) with time_i < time_j and event_i = 1.
PairCounts concordance_counts(const Eigen::VectorXd& risk, const Eigen::VectorXd& time,
                              const Eigen::VectorXi& event);
PairCounts concordance_counts_serial(const Eigen::VectorXd& risk, const Eigen::VectorXd& time,
                                     const Eigen::VectorXi& event);

/// X^T diag(w) X, each entry summed over rows in index order.
Eigen::MatrixXd weighted_gram(const Eigen::MatrixXd& x, const Eigen::VectorXd& w);
Eigen::MatrixXd weighted_gram_serial(const Eigen::MatrixXd& x, const Eigen::VectorXd& w);

/// Type-7 quantile of an ascending-sorted sample.
double sorted_quantile(const std::vector<double>& sorted, double q);

}  // namespace bayes_epi::kernels
