#include "bayes_epi/datagen.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "bayes_epi/error.hpp"
#include "bayes_epi/numerics.hpp"

namespace bayes_epi {
namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorCode::kInvalidConfig, what);
}

Eigen::MatrixXd draw_gaussian_rows(int n, const Eigen::MatrixXd& chol_lower, RngStream& rng) {
  const auto p = chol_lower.rows();
  Eigen::MatrixXd z(n, p);
  for (int i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < p; ++j) z(i, j) = rng.normal();
  }
  return z * chol_lower.transpose();
}

LabeledDataset draw_binary(int n, const BinSimConfig& c, const Eigen::MatrixXd& chol_lower,
                           RngStream rng) {
  LabeledDataset d;
  d.x = draw_gaussian_rows(n, chol_lower, rng);
  Eigen::VectorXd eta = (d.x * c.beta_star.tail(c.p)).array() + c.beta_star(0);
  d.p_true = eta.unaryExpr([](double v) { return stable_sigmoid(v); });
  d.y.resize(n);
  for (int i = 0; i < n; ++i) d.y(i) = rng.bernoulli((*d.p_true)(i)) ? 1 : 0;
  for (int j = 0; j < c.p; ++j) d.feature_names.push_back("x" + std::to_string(j + 1));
  return d;
}

SurvivalData draw_survival(int n, const SurvSimConfig& c, RngStream rng) {
  SurvivalData d;
  d.x = draw_gaussian_rows(n, Eigen::MatrixXd::Identity(c.p, c.p), rng);
  d.lp_true = d.x * c.beta_star;
  d.time.resize(n);
  d.event.resize(n);
  for (int i = 0; i < n; ++i) {
    const double t = rng.exponential(c.baseline_rate * std::exp((*d.lp_true)(i)));
    const double cens = c.censor_rate > 0.0 ? rng.exponential(c.censor_rate)
                                            : std::numeric_limits<double>::infinity();
    d.event(i) = t <= cens ? 1 : 0;
    d.time(i) = std::min(t, cens);
  }
  for (int j = 0; j < c.p; ++j) d.feature_names.push_back("x" + std::to_string(j + 1));
  return d;
}

}  // namespace

void LabeledDataset::validate() const {
  if (x.rows() != y.size()) throw Error(ErrorCode::kDimensionMismatch, "rows(X) != length(y)");
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    if (y(i) != 0 && y(i) != 1) throw Error(ErrorCode::kNonBinaryLabel, "label not in {0,1}");
  }
  if (p_true && p_true->size() != y.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "length(p_true) != n");
  }
}

void SurvivalData::validate() const {
  if (x.rows() != time.size() || time.size() != event.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "survival columns have different lengths");
  }
  for (Eigen::Index i = 0; i < time.size(); ++i) {
    if (!(time(i) >= 0.0)) throw Error(ErrorCode::kInvalidConfig, "negative survival time");
    if (event(i) != 0 && event(i) != 1) {
      throw Error(ErrorCode::kNonBinaryLabel, "event indicator not in {0,1}");
    }
  }
}

void BinSimConfig::validate() const {
  require(n_train > 0 && n_test > 0, "sample sizes must be positive");
  require(p > 0, "p must be positive");
  require(beta_star.size() == p + 1, "beta_star must have p + 1 entries (intercept first)");
  require(rho >= 0.0 && rho < 1.0, "rho must lie in [0, 1)");
}

void SurvSimConfig::validate() const {
  require(n_train > 0 && n_val > 0, "sample sizes must be positive");
  require(p > 0, "p must be positive");
  require(beta_star.size() == p, "beta_star must have p entries");
  require(baseline_rate > 0.0, "baseline_rate must be positive");
  require(censor_rate >= 0.0, "censor_rate must be nonnegative");
}

Eigen::MatrixXd ar1_correlation(int p, double rho) {
  Eigen::MatrixXd s(p, p);
  for (int j = 0; j < p; ++j) {
    for (int k = 0; k < p; ++k) s(j, k) = std::pow(rho, std::abs(j - k));
  }
  return s;
}

std::pair<LabeledDataset, LabeledDataset> gen_binary(const BinSimConfig& config,
                                                     const RngStream& rng) {
  config.validate();
  const Eigen::MatrixXd l = cholesky(ar1_correlation(config.p, config.rho)).lower;
  return {draw_binary(config.n_train, config, l, rng.substream(0)),
          draw_binary(config.n_test, config, l, rng.substream(1))};
}

std::pair<SurvivalData, SurvivalData> gen_survival(const SurvSimConfig& config,
                                                   const RngStream& rng) {
  config.validate();
  return {draw_survival(config.n_train, config, rng.substream(0)),
          draw_survival(config.n_val, config, rng.substream(1))};
}

LabeledDataset subset(const LabeledDataset& d, const std::vector<Eigen::Index>& rows) {
  LabeledDataset out;
  out.x = d.x(rows, Eigen::all);
  out.y = d.y(rows);
  if (d.p_true) out.p_true = (*d.p_true)(rows);
  out.feature_names = d.feature_names;
  return out;
}

SurvivalData subset(const SurvivalData& d, const std::vector<Eigen::Index>& rows) {
  SurvivalData out;
  out.x = d.x(rows, Eigen::all);
  out.time = d.time(rows);
  out.event = d.event(rows);
  if (d.lp_true) out.lp_true = (*d.lp_true)(rows);
  out.feature_names = d.feature_names;
  return out;
}

std::pair<std::vector<Eigen::Index>, std::vector<Eigen::Index>> split_indices(Eigen::Index n,
                                                                              double train_fraction,
                                                                              RngStream& rng) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw Error(ErrorCode::kInvalidConfig, "train fraction must lie in (0, 1)");
  }
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), Eigen::Index{0});
  rng.shuffle(idx.begin(), idx.end());
  const auto n_train =
      static_cast<std::size_t>(std::floor(train_fraction * static_cast<double>(n)));
  std::vector<Eigen::Index> train(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_train));
  std::vector<Eigen::Index> rest(idx.begin() + static_cast<std::ptrdiff_t>(n_train), idx.end());
  return {train, rest};
}

}  // namespace bayes_epi
