#include "bayes_epi/decision.hpp"

#include <cmath>

#include "bayes_epi/error.hpp"

namespace bayes_epi {

CostSpec::CostSpec(double cost_fp, double cost_fn) : cost_fp_(cost_fp), cost_fn_(cost_fn) {
  const auto ok = [](double v) { return std::isfinite(v) && v > 0.0; };
  if (!ok(cost_fp) || !ok(cost_fn)) {
    throw Error(ErrorCode::kInvalidConfig, "costs must be positive and finite");
  }
}

double screening_threshold(const CostSpec& costs) {
  return costs.cost_fp() / (costs.cost_fp() + costs.cost_fn());
}

ScreeningDecision decide(const Eigen::VectorXd& probs, const CostSpec& costs) {
  ScreeningDecision d;
  d.threshold = screening_threshold(costs);
  const Eigen::Index n = probs.size();
  d.decisions.resize(n);
  d.expected_loss_screen.resize(n);
  d.expected_loss_noscreen.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    d.expected_loss_screen(i) = costs.cost_fp() * (1.0 - probs(i));
    d.expected_loss_noscreen(i) = costs.cost_fn() * probs(i);
    // Thresholding directly keeps the rule exact at p == t*, where the two
    // rounded losses can disagree in the last bit.
    d.decisions(i) = probs(i) >= d.threshold ? 1 : 0;
  }
  return d;
}

ScreeningDecision decide_interval_aware(const Eigen::VectorXd& probs,
                                        const Eigen::VectorXd& upper, const CostSpec& costs) {
  if (upper.size() != probs.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "upper bounds length differs from probabilities");
  }
  ScreeningDecision d = decide(probs, costs);
  for (Eigen::Index i = 0; i < probs.size(); ++i) {
    d.decisions(i) = upper(i) >= d.threshold ? 1 : 0;
  }
  return d;
}

}  // namespace bayes_epi
