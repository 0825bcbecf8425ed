#pragma once

#include <optional>
#include <vector>

#include <Eigen/Dense>

namespace bayes_epi {

inline constexpr double kProbabilityClip = 1e-12;

struct CalibrationFit {
  double intercept = 0.0;
  double slope = 1.0;
};

struct MetricRecord {
  double auc = 0.0;
  double brier = 0.0;
  double log_loss = 0.0;
  double calib_intercept = 0.0;
  double calib_slope = 0.0;
  std::optional<double> coverage;
};

struct DecileRow {
  int bin = 0;
  double mean_predicted = 0.0;
  double observed_proportion = 0.0;
  Eigen::Index n = 0;
};
using DecileTable = std::vector<DecileRow>;

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;
  double threshold = 0.0;
};

/// Mann-Whitney AUC, tied scores get half credit.
double auc(const Eigen::VectorXd& scores, const Eigen::VectorXi& labels);
double brier(const Eigen::VectorXd& probs, const Eigen::VectorXi& labels);
/// Mean binary cross-entropy on probabilities clipped to [1e-12, 1 - 1e-12].
double log_loss(const Eigen::VectorXd& probs, const Eigen::VectorXi& labels);
/// Logistic regression of labels on logit(clipped probs).
CalibrationFit calibration_fit(const Eigen::VectorXd& probs, const Eigen::VectorXi& labels);
/// Rank-based deciles; the first n % 10 bins hold one extra observation.
DecileTable decile_table(const Eigen::VectorXd& probs, const Eigen::VectorXi& labels);
/// Fraction of truth values inside the closed intervals.
double coverage(const Eigen::VectorXd& lower, const Eigen::VectorXd& upper,
                const Eigen::VectorXd& truth);
/// Harrell's C: pairs with time_i < time_j and event_i = 1; higher risk should fail first.
double c_index(const Eigen::VectorXd& risk, const Eigen::VectorXd& time,
               const Eigen::VectorXi& event);

/// Empirical ROC curve from (0,0) to (1,1), one point per distinct score.
std::vector<RocPoint> roc_curve(const Eigen::VectorXd& scores, const Eigen::VectorXi& labels);

/// AUC, Brier, log-loss and calibration in one record (coverage left empty).
MetricRecord evaluate_probabilities(const Eigen::VectorXd& probs, const Eigen::VectorXi& labels);

}  // namespace bayes_epi
