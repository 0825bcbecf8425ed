#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "bayes_epi/rng.hpp"

namespace bayes_epi {

/// Covariates with binary labels; `p_true` is only known for simulated data.
struct LabeledDataset {
  Eigen::MatrixXd x;
  Eigen::VectorXi y;
  std::optional<Eigen::VectorXd> p_true;
  std::vector<std::string> feature_names;

  Eigen::Index size() const { return x.rows(); }
  void validate() const;
};

/// Right-censored outcomes; `lp_true` is the generating linear predictor.
struct SurvivalData {
  Eigen::MatrixXd x;
  Eigen::VectorXd time;
  Eigen::VectorXi event;
  std::optional<Eigen::VectorXd> lp_true;
  std::vector<std::string> feature_names;

  Eigen::Index size() const { return x.rows(); }
  Eigen::Index event_count() const { return event.sum(); }
  void validate() const;
};

struct BinSimConfig {
  int n_train = 500;
  int n_test = 500;
  int p = 6;
  Eigen::VectorXd beta_star;  // intercept first, length p + 1
  double rho = 0.0;

  void validate() const;
};

struct SurvSimConfig {
  int n_train = 400;
  int n_val = 200;
  int p = 6;
  Eigen::VectorXd beta_star;  // length p
  double baseline_rate = 0.1;
  double censor_rate = 0.05;

  void validate() const;
};

/// AR(1) correlation matrix rho^|j-k|.
Eigen::MatrixXd ar1_correlation(int p, double rho);

/// Train and test sets from the same logistic mechanism, on substreams 0 and 1.
std::pair<LabeledDataset, LabeledDataset> gen_binary(const BinSimConfig& config,
                                                     const RngStream& rng);

/// Exponential proportional-hazards event times with independent exponential
/// censoring; ties T == C count as events.
std::pair<SurvivalData, SurvivalData> gen_survival(const SurvSimConfig& config,
                                                   const RngStream& rng);

/// Label coding: with `positive_level` set, that string is 1 and every other
/// value 0 (exactly two levels required). Without it, 0/1 and the pairs
/// neg/pos, no/yes, false/true are recognised.
LabeledDataset load_csv_binary(const std::string& path, const std::string& label_column,
                               const std::optional<std::string>& positive_level = std::nullopt);

SurvivalData load_csv_survival(const std::string& path, const std::string& time_column,
                               const std::string& event_column);

/// Row subset helpers used for seeded splits.
LabeledDataset subset(const LabeledDataset& d, const std::vector<Eigen::Index>& rows);
SurvivalData subset(const SurvivalData& d, const std::vector<Eigen::Index>& rows);

/// Seeded shuffle split; the first floor(fraction * n) shuffled rows train.
std::pair<std::vector<Eigen::Index>, std::vector<Eigen::Index>> split_indices(Eigen::Index n,
                                                                              double train_fraction,
                                                                              RngStream& rng);

}  // namespace bayes_epi
