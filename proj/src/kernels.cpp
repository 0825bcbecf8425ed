#include "bayes_epi/kernels.hpp"

#include <algorithm>
#include <cmath>

#include "bayes_epi/error.hpp"
#include "bayes_epi/numerics.hpp"

namespace bayes_epi::kernels {
namespace {

void check_predictive_dims(const Eigen::MatrixXd& design, const Eigen::MatrixXd& draws) {
  if (design.cols() != draws.rows()) {
    throw Error(ErrorCode::kDimensionMismatch, "design columns do not match draw dimension");
  }
}

// Shared per-row body so the serial and parallel paths cannot drift apart.
void summarize_row(const Eigen::MatrixXd& design, const Eigen::MatrixXd& draws, Eigen::Index i,
                   double lo_q, double hi_q, std::vector<double>& row_x,
                   std::vector<double>& probs, PredictiveSummary& out, bool keep) {
  const Eigen::Index dim = design.cols();
  const Eigen::Index s_count = draws.cols();
  for (Eigen::Index k = 0; k < dim; ++k) row_x[k] = design(i, k);
  double sum = 0.0;
  for (Eigen::Index s = 0; s < s_count; ++s) {
    const double* beta = draws.col(s).data();
    double eta = 0.0;
    for (Eigen::Index k = 0; k < dim; ++k) eta += row_x[k] * beta[k];
    const double p = stable_sigmoid(eta);
    probs[s] = p;
    sum += p;
    if (keep) out.samples(i, s) = p;
  }
  out.mean(i) = sum / static_cast<double>(s_count);
  std::sort(probs.begin(), probs.end());
  out.lower(i) = sorted_quantile(probs, lo_q);
  out.upper(i) = sorted_quantile(probs, hi_q);
}

PredictiveSummary allocate(Eigen::Index n, Eigen::Index s, bool keep) {
  PredictiveSummary out;
  out.mean.resize(n);
  out.lower.resize(n);
  out.upper.resize(n);
  if (keep) out.samples.resize(n, s);
  return out;
}

void check_pair_dims(const Eigen::VectorXd& risk, const Eigen::VectorXd& time,
                     const Eigen::VectorXi& event) {
  if (risk.size() != time.size() || risk.size() != event.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "risk, time and event lengths differ");
  }
}

inline void count_row(const Eigen::VectorXd& risk, const Eigen::VectorXd& time, Eigen::Index i,
                      std::int64_t& conc, std::int64_t& tied, std::int64_t& comp) {
  const double ti = time(i);
  const double ri = risk(i);
  for (Eigen::Index j = 0; j < time.size(); ++j) {
    if (ti < time(j)) {
      ++comp;
      if (ri > risk(j)) {
        ++conc;
      } else if (ri == risk(j)) {
        ++tied;
      }
    }
  }
}

}  // namespace

double sorted_quantile(const std::vector<double>& sorted, double q) {
  const double h = (static_cast<double>(sorted.size()) - 1.0) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = h - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

PredictiveSummary predictive_summary_serial(const Eigen::MatrixXd& design,
                                            const Eigen::MatrixXd& draws, double level,
                                            bool keep_samples) {
  check_predictive_dims(design, draws);
  const Eigen::Index n = design.rows();
  PredictiveSummary out = allocate(n, draws.cols(), keep_samples);
  const double lo_q = 0.5 * (1.0 - level);
  const double hi_q = 1.0 - lo_q;
  std::vector<double> row_x(design.cols());
  std::vector<double> probs(draws.cols());
  for (Eigen::Index i = 0; i < n; ++i) {
    summarize_row(design, draws, i, lo_q, hi_q, row_x, probs, out, keep_samples);
  }
  return out;
}

PredictiveSummary predictive_summary(const Eigen::MatrixXd& design, const Eigen::MatrixXd& draws,
                                     double level, bool keep_samples) {
  check_predictive_dims(design, draws);
  const Eigen::Index n = design.rows();
  PredictiveSummary out = allocate(n, draws.cols(), keep_samples);
  const double lo_q = 0.5 * (1.0 - level);
  const double hi_q = 1.0 - lo_q;
#pragma omp parallel
  {
    std::vector<double> row_x(design.cols());
    std::vector<double> probs(draws.cols());
#pragma omp for schedule(static)
    for (Eigen::Index i = 0; i < n; ++i) {
      summarize_row(design, draws, i, lo_q, hi_q, row_x, probs, out, keep_samples);
    }
  }
  return out;
}

PairCounts concordance_counts_serial(const Eigen::VectorXd& risk, const Eigen::VectorXd& time,
                                     const Eigen::VectorXi& event) {
  check_pair_dims(risk, time, event);
  PairCounts c;
  for (Eigen::Index i = 0; i < time.size(); ++i) {
    if (event(i) == 1) count_row(risk, time, i, c.concordant, c.tied, c.comparable);
  }
  return c;
}

PairCounts concordance_counts(const Eigen::VectorXd& risk, const Eigen::VectorXd& time,
                              const Eigen::VectorXi& event) {
  check_pair_dims(risk, time, event);
  std::int64_t conc = 0, tied = 0, comp = 0;
  const Eigen::Index n = time.size();
#pragma omp parallel for schedule(dynamic, 64) reduction(+ : conc, tied, comp)
  for (Eigen::Index i = 0; i < n; ++i) {
    if (event(i) == 1) count_row(risk, time, i, conc, tied, comp);
  }
  return {conc, tied, comp};
}

Eigen::MatrixXd weighted_gram_serial(const Eigen::MatrixXd& x, const Eigen::VectorXd& w) {
  if (x.rows() != w.size()) throw Error(ErrorCode::kDimensionMismatch, "weights length");
  const Eigen::Index p = x.cols();
  Eigen::MatrixXd g(p, p);
  for (Eigen::Index j = 0; j < p; ++j) {
    for (Eigen::Index k = j; k < p; ++k) {
      double s = 0.0;
      for (Eigen::Index i = 0; i < x.rows(); ++i) s += w(i) * x(i, j) * x(i, k);
      g(j, k) = s;
      g(k, j) = s;
    }
  }
  return g;
}

Eigen::MatrixXd weighted_gram(const Eigen::MatrixXd& x, const Eigen::VectorXd& w) {
  if (x.rows() != w.size()) throw Error(ErrorCode::kDimensionMismatch, "weights length");
  const Eigen::Index p = x.cols();
  Eigen::MatrixXd g(p, p);
#pragma omp parallel for schedule(dynamic, 1) if (x.rows() * p > 20000)
  for (Eigen::Index j = 0; j < p; ++j) {
    for (Eigen::Index k = j; k < p; ++k) {
      double s = 0.0;
      for (Eigen::Index i = 0; i < x.rows(); ++i) s += w(i) * x(i, j) * x(i, k);
      g(j, k) = s;
      g(k, j) = s;
    }
  }
  return g;
}

}  // namespace bayes_epi::kernels
