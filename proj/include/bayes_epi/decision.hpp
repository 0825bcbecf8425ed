#pragma once

#include <optional>

#include <Eigen/Dense>

namespace bayes_epi {

/// Misclassification costs; correct actions cost nothing.
class CostSpec {
 public:
  CostSpec(double cost_fp, double cost_fn);

  double cost_fp() const { return cost_fp_; }
  double cost_fn() const { return cost_fn_; }

 private:
  double cost_fp_;
  double cost_fn_;
};

struct ScreeningDecision {
  double threshold = 0.0;
  Eigen::VectorXi decisions;  // 1 = screen
  Eigen::VectorXd expected_loss_screen;
  Eigen::VectorXd expected_loss_noscreen;
};

/// C_FP / (C_FP + C_FN).
double screening_threshold(const CostSpec& costs);

/// Screen when C_FN * p >= C_FP * (1 - p), i.e. p >= threshold; ties screen.
ScreeningDecision decide(const Eigen::VectorXd& probs, const CostSpec& costs);

/// Interval-aware variant: screen when the upper credible bound reaches the
/// threshold. Expected losses still use the predictive mean.
ScreeningDecision decide_interval_aware(const Eigen::VectorXd& probs,
                                        const Eigen::VectorXd& upper, const CostSpec& costs);

}  // namespace bayes_epi
