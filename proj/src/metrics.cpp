#include "bayes_epi/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "bayes_epi/bayes_logit.hpp"
#include "bayes_epi/error.hpp"
#include "bayes_epi/kernels.hpp"

namespace bayes_epi {
namespace {

void check_same_length(Eigen::Index a, Eigen::Index b) {
  if (a != b) throw Error(ErrorCode::kDimensionMismatch, "vector lengths differ");
}

void count_classes(const Eigen::VectorXi& labels, Eigen::Index& pos, Eigen::Index& neg) {
  pos = 0;
  neg = 0;
  for (Eigen::Index i = 0; i < labels.size(); ++i) (labels(i) == 1 ? pos : neg)++;
  if (pos == 0 || neg == 0) throw Error(ErrorCode::kSingleClass, "both classes must be present");
}

std::vector<Eigen::Index> order_by(const Eigen::VectorXd& v) {
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(v.size()));
  std::iota(idx.begin(), idx.end(), Eigen::Index{0});
  std::stable_sort(idx.begin(), idx.end(), [&](Eigen::Index a, Eigen::Index b) { return v(a) < v(b); });
  return idx;
}

double clip(double p) { return std::clamp(p, kProbabilityClip, 1.0 - kProbabilityClip); }

}  // namespace

double auc(const Eigen::VectorXd& scores, const Eigen::VectorXi& labels) {
  check_same_length(scores.size(), labels.size());
  Eigen::Index pos = 0, neg = 0;
  count_classes(labels, pos, neg);
  // Sweep ascending score groups; each positive beats the negatives below its
  // group and ties with the negatives inside it.
  const auto idx = order_by(scores);
  std::int64_t wins = 0, ties = 0, neg_below = 0;
  std::size_t i = 0;
  while (i < idx.size()) {
    std::size_t j = i;
    std::int64_t gp = 0, gn = 0;
    while (j < idx.size() && scores(idx[j]) == scores(idx[i])) {
      (labels(idx[j]) == 1 ? gp : gn)++;
      ++j;
    }
    wins += gp * neg_below;
    ties += gp * gn;
    neg_below += gn;
    i = j;
  }
  return (static_cast<double>(wins) + 0.5 * static_cast<double>(ties)) /
         (static_cast<double>(pos) * static_cast<double>(neg));
}

double brier(const Eigen::VectorXd& probs, const Eigen::VectorXi& labels) {
  check_same_length(probs.size(), labels.size());
  return (probs - labels.cast<double>()).squaredNorm() / static_cast<double>(probs.size());
}

double log_loss(const Eigen::VectorXd& probs, const Eigen::VectorXi& labels) {
  check_same_length(probs.size(), labels.size());
  double s = 0.0;
  for (Eigen::Index i = 0; i < probs.size(); ++i) {
    const double p = clip(probs(i));
    s += labels(i) == 1 ? std::log(p) : std::log1p(-p);
  }
  return -s / static_cast<double>(probs.size());
}

CalibrationFit calibration_fit(const Eigen::VectorXd& probs, const Eigen::VectorXi& labels) {
  check_same_length(probs.size(), labels.size());
  Eigen::Index pos = 0, neg = 0;
  count_classes(labels, pos, neg);
  Eigen::MatrixXd design(probs.size(), 2);
  design.col(0).setOnes();
  for (Eigen::Index i = 0; i < probs.size(); ++i) design(i, 1) = logit(clip(probs(i)));
  const double lo = design.col(1).minCoeff();
  const double hi = design.col(1).maxCoeff();
  if (!(hi > lo)) throw Error(ErrorCode::kDegenerateLogits, "predicted logits have zero variance");
  const LogisticFit fit = fit_mle_design(design, labels);
  return {fit.coef(0), fit.coef(1)};
}

DecileTable decile_table(const Eigen::VectorXd& probs, const Eigen::VectorXi& labels) {
  check_same_length(probs.size(), labels.size());
  const Eigen::Index n = probs.size();
  if (n < 10) throw Error(ErrorCode::kTooFewObservations, "decile table needs n >= 10");
  const auto idx = order_by(probs);
  const Eigen::Index base = n / 10;
  const Eigen::Index extra = n % 10;
  DecileTable table;
  std::size_t pos = 0;
  for (int b = 0; b < 10; ++b) {
    const Eigen::Index size = base + (b < extra ? 1 : 0);
    double sp = 0.0, sy = 0.0;
    for (Eigen::Index k = 0; k < size; ++k, ++pos) {
      sp += probs(idx[pos]);
      sy += labels(idx[pos]);
    }
    table.push_back({b + 1, sp / static_cast<double>(size), sy / static_cast<double>(size), size});
  }
  return table;
}

double coverage(const Eigen::VectorXd& lower, const Eigen::VectorXd& upper,
                const Eigen::VectorXd& truth) {
  check_same_length(lower.size(), upper.size());
  check_same_length(lower.size(), truth.size());
  if (truth.size() == 0) throw Error(ErrorCode::kTooFewObservations, "empty coverage input");
  Eigen::Index inside = 0;
  for (Eigen::Index i = 0; i < truth.size(); ++i) {
    if (lower(i) <= truth(i) && truth(i) <= upper(i)) ++inside;
  }
  return static_cast<double>(inside) / static_cast<double>(truth.size());
}

double c_index(const Eigen::VectorXd& risk, const Eigen::VectorXd& time,
               const Eigen::VectorXi& event) {
  const kernels::PairCounts c = kernels::concordance_counts(risk, time, event);
  if (c.comparable == 0) throw Error(ErrorCode::kNoComparablePairs, "no comparable pairs");
  return c.value();
}

std::vector<RocPoint> roc_curve(const Eigen::VectorXd& scores, const Eigen::VectorXi& labels) {
  check_same_length(scores.size(), labels.size());
  Eigen::Index pos = 0, neg = 0;
  count_classes(labels, pos, neg);
  auto idx = order_by(scores);
  std::reverse(idx.begin(), idx.end());
  std::vector<RocPoint> curve{{0.0, 0.0, std::numeric_limits<double>::infinity()}};
  Eigen::Index tp = 0, fp = 0;
  std::size_t i = 0;
  while (i < idx.size()) {
    const double s = scores(idx[i]);
    while (i < idx.size() && scores(idx[i]) == s) {
      (labels(idx[i]) == 1 ? tp : fp)++;
      ++i;
    }
    curve.push_back({static_cast<double>(fp) / static_cast<double>(neg),
                     static_cast<double>(tp) / static_cast<double>(pos), s});
  }
  return curve;
}

MetricRecord evaluate_probabilities(const Eigen::VectorXd& probs, const Eigen::VectorXi& labels) {
  MetricRecord m;
  m.auc = auc(probs, labels);
  m.brier = brier(probs, labels);
  m.log_loss = log_loss(probs, labels);
  const CalibrationFit c = calibration_fit(probs, labels);
  m.calib_intercept = c.intercept;
  m.calib_slope = c.slope;
  return m;
}

}  // namespace bayes_epi
