#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "bayes_epi/bayes_logit.hpp"
#include "bayes_epi/datagen.hpp"
#include "bayes_epi/gp_bo.hpp"
#include "bayes_epi/report.hpp"

namespace bayes_epi {

enum class ExperimentKind { kSimBinary, kSimHighdim, kSimSurvival, kFitBinary, kTuneCox };

const char* to_string(ExperimentKind kind);
std::optional<ExperimentKind> parse_experiment_kind(const std::string& name);

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::kSimBinary;
  std::uint64_t seed = 20240601;
  int replicates = 1;
  int workers = 1;
  std::string out = "results";
  std::string tag;  // defaults to seed<N>

  BinSimConfig binary;
  SurvSimConfig survival;
  PriorSpec prior;
  int draws = 4000;
  double level = 0.95;

  int cv_folds = 5;
  int path_len = 50;
  BoOptions bo;
  Domain domain;

  std::string data;
  std::string label_column = "diabetes";
  std::optional<std::string> positive_level;
  std::string time_column = "time";
  std::string event_column = "cens";
  double train_fraction = 0.7;
  double cost_fp = 1.0;
  double cost_fn = 9.0;
  bool interval_aware = false;

  void validate() const;
  std::filesystem::path output_dir() const;
};

/// Regime defaults for each experiment.
ExperimentConfig default_config(ExperimentKind kind);

/// Sets one key; unknown keys and malformed values raise InvalidConfig.
void apply_setting(ExperimentConfig& config, const std::string& key, const std::string& value);

/// Flat `key = value` lines; `#` starts a comment.
std::vector<std::pair<std::string, std::string>> parse_config_text(const std::string& text);

/// Defaults, then the file (if any), then `overrides` in order.
ExperimentConfig load_config(ExperimentKind kind, const std::optional<std::filesystem::path>& file,
                             const std::vector<std::pair<std::string, std::string>>& overrides = {});

/// Every key with its effective value; parses back to the same config.
std::string config_snapshot(const ExperimentConfig& config);

struct ExperimentOutput {
  std::filesystem::path dir;
  std::map<std::string, CsvTable> tables;
  std::map<std::string, CsvTable> figures;
};

ExperimentOutput run_sim_binary(const ExperimentConfig& config);
ExperimentOutput run_sim_survival(const ExperimentConfig& config);
ExperimentOutput run_fit_binary(const ExperimentConfig& config);
ExperimentOutput run_tune_cox(const ExperimentConfig& config);

/// Validates, runs, and writes tables/, figures/ and config.snapshot under
/// config.output_dir().
ExperimentOutput run_experiment(const ExperimentConfig& config);

}  // namespace bayes_epi
