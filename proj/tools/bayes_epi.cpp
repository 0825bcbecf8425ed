#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "bayes_epi/error.hpp"
#include "bayes_epi/experiments.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitNumerical = 4;

int exit_code(bayes_epi::ErrorCategory c) {
  switch (c) {
    case bayes_epi::ErrorCategory::kConfig: return kExitConfig;
    case bayes_epi::ErrorCategory::kData: return kExitData;
    case bayes_epi::ErrorCategory::kNumerical: return kExitNumerical;
  }
  return 1;
}

struct Flags {
  std::string config;
  std::optional<std::string> seed, out, replicates, workers, tag;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bayesian risk-prediction experiments: simulations and CSV pipelines"};
  app.require_subcommand(1);
  std::vector<std::pair<bayes_epi::ExperimentKind, CLI::App*>> subs;
  Flags flags;
  for (auto kind : {bayes_epi::ExperimentKind::kSimBinary, bayes_epi::ExperimentKind::kSimHighdim,
                    bayes_epi::ExperimentKind::kSimSurvival, bayes_epi::ExperimentKind::kFitBinary,
                    bayes_epi::ExperimentKind::kTuneCox}) {
    CLI::App* sub = app.add_subcommand(bayes_epi::to_string(kind));
    sub->add_option("--config", flags.config, "flat key = value config file");
    sub->add_option("--seed", flags.seed, "master seed");
    sub->add_option("--out", flags.out, "output root directory");
    sub->add_option("--replicates", flags.replicates, "number of replicates");
    sub->add_option("--workers", flags.workers, "replicate worker threads");
    sub->add_option("--tag", flags.tag, "output subdirectory name (default seed<N>)");
    subs.emplace_back(kind, sub);
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }

  try {
    bayes_epi::ExperimentKind kind{};
    for (const auto& [k, sub] : subs) {
      if (sub->parsed()) kind = k;
    }
    std::vector<std::pair<std::string, std::string>> overrides;
    auto add = [&](const char* key, const std::optional<std::string>& v) {
      if (v) overrides.emplace_back(key, *v);
    };
    add("seed", flags.seed);
    add("out", flags.out);
    add("replicates", flags.replicates);
    add("workers", flags.workers);
    add("tag", flags.tag);
    const auto config = bayes_epi::load_config(
        kind, flags.config.empty() ? std::nullopt : std::optional<std::filesystem::path>(flags.config), overrides);
    const auto out = bayes_epi::run_experiment(config);
    std::cout << "wrote " << out.dir.string() << '\n';
    for (const auto& [name, table] : out.tables) {
      if (name == "summary" || name == "best_config" || name == "metrics") {
        std::cout << "\n" << name << ":\n" << table.to_string();
      }
    }
    return 0;
  } catch (const bayes_epi::Error& e) {
    std::cerr << "bayes-epi: " << bayes_epi::to_string(e.code()) << ": " << e.what() << '\n';
    return exit_code(e.category());
  } catch (const std::exception& e) {
    std::cerr << "bayes-epi: " << e.what() << '\n';
    return 1;
  }
}
