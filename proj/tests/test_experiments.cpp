#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include "bayes_epi/error.hpp"
#include "bayes_epi/experiments.hpp"
#include "doctest.h"

using namespace bayes_epi;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("bayes_epi_exp_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

ExperimentConfig small_binary(const std::string& out) {
  auto c = default_config(ExperimentKind::kSimBinary);
  c.replicates = 3;
  c.binary.n_train = 120;
  c.binary.n_test = 100;
  c.draws = 400;
  c.out = out;
  return c;
}

ExperimentConfig small_survival(const std::string& out) {
  auto c = default_config(ExperimentKind::kSimSurvival);
  c.replicates = 2;
  c.survival.n_train = 150;
  c.survival.n_val = 80;
  c.path_len = 10;
  c.bo = {3, 3, 2.576};
  c.out = out;
  return c;
}

double sample_sd(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m += x;
  m /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / (static_cast<double>(v.size()) - 1.0));
}

}  // namespace

TEST_CASE("experiment names round trip") {
  for (const char* n : {"sim-binary", "sim-highdim", "sim-survival", "fit-binary", "tune-cox"}) {
    const auto k = parse_experiment_kind(n);
    REQUIRE(k.has_value());
    CHECK(std::string(to_string(*k)) == n);
  }
  CHECK_FALSE(parse_experiment_kind("sim-other").has_value());
}

TEST_CASE("regime defaults") {
  const auto b = default_config(ExperimentKind::kSimBinary);
  CHECK(b.replicates == 30);
  CHECK(b.binary.n_train == 500);
  CHECK(b.binary.beta_star.size() == 7);
  const auto h = default_config(ExperimentKind::kSimHighdim);
  CHECK(h.replicates == 50);
  CHECK(h.binary.p == 20);
  CHECK(h.binary.n_train == 80);
  CHECK(h.binary.n_test == 1000);
  CHECK(h.binary.rho == 0.7);
  CHECK(h.prior.coef_sd == 1.0);
  CHECK(h.binary.beta_star.tail(17).cwiseAbs().sum() == 0.0);
  const auto s = default_config(ExperimentKind::kSimSurvival);
  CHECK(s.replicates == 20);
  CHECK(s.bo.init_n == 5);
  CHECK(s.bo.iters == 15);
  CHECK(s.domain.lower(0) == -5.0);
  CHECK(s.domain.upper(0) == 1.0);
  CHECK(default_config(ExperimentKind::kFitBinary).level == 0.9);
}

TEST_CASE("config text parsing, overrides and unknown keys") {
  const auto kv = parse_config_text("# comment\nseed = 7\n\n  draws=500  # trailing\nbeta_star = 1, 2,3\n");
  REQUIRE(kv.size() == 3);
  CHECK(kv[1].first == "draws");
  CHECK(kv[1].second == "500");
  const fs::path file = scratch("cfg.txt");
  std::ofstream(file) << "seed = 7\nreplicates = 4\nrho = 0.25\n";
  const auto c = load_config(ExperimentKind::kSimBinary, file, {{"replicates", "9"}});
  CHECK(c.seed == 7);
  CHECK(c.replicates == 9);
  CHECK(c.binary.rho == 0.25);
  auto d = default_config(ExperimentKind::kSimBinary);
  CHECK_THROWS_AS(apply_setting(d, "no_such_key", "1"), Error);
  CHECK_THROWS_AS(apply_setting(d, "seed", "abc"), Error);
  CHECK_THROWS_AS(apply_setting(d, "interval_aware", "maybe"), Error);
  CHECK_THROWS_AS(parse_config_text("just words\n"), Error);
  CHECK_THROWS_AS(load_config(ExperimentKind::kSimBinary, fs::path("/nonexistent.cfg")), Error);
}

TEST_CASE("snapshot parses back to the same effective config") {
  for (auto kind : {ExperimentKind::kSimBinary, ExperimentKind::kSimHighdim, ExperimentKind::kSimSurvival,
                    ExperimentKind::kFitBinary, ExperimentKind::kTuneCox}) {
    auto c = default_config(kind);
    c.seed = 99;
    c.binary.rho = 0.123456789;
    const std::string snap = config_snapshot(c);
    ExperimentConfig back = default_config(kind);
    for (const auto& [k, v] : parse_config_text(snap)) apply_setting(back, k, v);
    CHECK(config_snapshot(back) == snap);
  }
}

TEST_CASE("invalid configs are rejected before running") {
  auto c = default_config(ExperimentKind::kSimBinary);
  c.replicates = 0;
  CHECK_THROWS_AS(run_experiment(c), Error);
  auto f = default_config(ExperimentKind::kFitBinary);
  try {
    run_experiment(f);
    FAIL("expected a config error");
  } catch (const Error& e) {
    CHECK(e.category() == ErrorCategory::kConfig);
  }
}

TEST_CASE("single replicate reports zero sds") {
  auto c = small_binary(scratch("r1").string());
  c.replicates = 1;
  const auto out = run_experiment(c);
  const auto& s = out.tables.at("summary");
  for (const auto& row : s.rows) {
    CHECK(row[s.column("n_sim")] == "1");
    CHECK(row[s.column("auc_sd")] == "0");
  }
}

TEST_CASE("binary simulation outputs are consistent views of one table") {
  const auto c = small_binary(scratch("bin").string());
  const auto out = run_experiment(c);
  const fs::path dir = out.dir;
  CHECK(dir == fs::path(c.out) / "sim-binary" / "seed20240601");
  for (const char* f : {"tables/summary.csv", "tables/replicates.csv", "figures/auc_boxplot.csv",
                        "figures/auc_boxplot.svg", "figures/coverage_boxplot.csv", "config.snapshot"}) {
    CHECK(fs::exists(dir / f));
  }
  const auto& reps = out.tables.at("replicates");
  CHECK(reps.rows.size() == 6);
  const auto& summary = out.tables.at("summary");
  CHECK(summary.rows[1][summary.column("cov_mean")] == "NA");
  std::vector<double> auc;
  for (const auto& r : reps.rows) {
    if (r[1] == "Bayes") auc.push_back(std::stod(r[reps.column("auc")]));
  }
  const double sd = std::stod(summary.rows[0][summary.column("auc_sd")]);
  CHECK(sd == doctest::Approx(sample_sd(auc)).epsilon(1e-5));
  const auto& fig = out.figures.at("auc_boxplot");
  REQUIRE(fig.rows.size() == reps.rows.size());
  for (std::size_t i = 0; i < fig.rows.size(); ++i) CHECK(fig.rows[i][2] == reps.rows[i][reps.column("auc")]);
  CHECK(out.figures.at("coverage_boxplot").rows.size() == 3);
  CHECK(slurp(dir / "tables/replicates.csv") == reps.to_string());
}

TEST_CASE("table bytes do not depend on the worker count") {
  auto a = small_binary(scratch("det").string());
  a.tag = "w1";
  a.workers = 1;
  auto b = a;
  b.tag = "w3";
  b.workers = 3;
  const auto oa = run_experiment(a);
  const auto ob = run_experiment(b);
  for (const auto& [name, table] : oa.tables) {
    CHECK(slurp(oa.dir / "tables" / (name + ".csv")) == slurp(ob.dir / "tables" / (name + ".csv")));
  }
}

TEST_CASE("survival smoke run emits every file") {
  const auto out = run_experiment(small_survival(scratch("surv").string()));
  CHECK(out.tables.at("summary").rows.size() == 3);
  CHECK(out.tables.at("replicates").rows.size() == 6);
  CHECK(out.tables.at("bo_history").rows.size() == 6);
  for (const char* f : {"tables/bo_history.csv", "figures/bo_trace.svg", "figures/bo_landscape.csv",
                        "figures/cindex_boxplot.svg"}) {
    CHECK(fs::exists(out.dir / f));
  }
  CHECK(out.tables.at("bo_history").header ==
        std::vector<std::string>{"round", "log_lambda", "alpha", "c_index", "iteration", "design"});
}

TEST_CASE("no-signal survival regime stays near one half") {
  auto c = small_survival(scratch("null").string());
  c.survival.beta_star = Eigen::VectorXd::Zero(6);
  c.replicates = 3;
  const auto out = run_experiment(c);
  const auto& s = out.tables.at("summary");
  for (const auto& row : s.rows) CHECK(std::fabs(std::stod(row[s.column("cindex_mean")]) - 0.5) <= 0.05);
}

TEST_CASE("fit-binary on a single-class file aborts with SingleClass") {
  const fs::path csv = scratch("neg.csv");
  std::ofstream f(csv);
  f << "a,b,y\n";
  for (int i = 0; i < 40; ++i) f << i << "," << (i * 7) % 11 << ",0\n";
  f.close();
  auto c = default_config(ExperimentKind::kFitBinary);
  c.data = csv.string();
  c.label_column = "y";
  c.out = scratch("neg_out").string();
  try {
    run_experiment(c);
    FAIL("expected SingleClass");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kSingleClass);
  }
}

TEST_CASE("fit-binary pipeline on the bundled Pima fixture") {
  auto c = default_config(ExperimentKind::kFitBinary);
  c.data = BAYES_EPI_TEST_DATA "/pima_complete_cases.csv";
  c.out = scratch("pima").string();
  const auto out = run_experiment(c);
  const auto& dec = out.tables.at("decisions");
  for (const auto& row : dec.rows) {
    CHECK(row[dec.column("threshold")] == "0.1");
    CHECK((std::stod(row[dec.column("mean")]) >= 0.1) == (row[dec.column("screen")] == "1"));
  }
  CHECK(out.tables.at("predictions").rows.size() == 160);
  CHECK(out.tables.at("deciles").rows.size() == 10);
  CHECK(out.tables.at("posterior_summary").rows.size() == 8);
  CHECK(fs::exists(out.dir / "figures/roc.svg"));
  CHECK(fs::exists(out.dir / "figures/calibration.csv"));
}

TEST_CASE("CLI exit codes") {
  const std::string cli = BAYES_EPI_CLI;
  const fs::path out = scratch("cli");
  auto run = [&](const std::string& args) {
    const int status = std::system((cli + " " + args + " > /dev/null 2>&1").c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  };
  CHECK(run("sim-binary --replicates 0 --out " + out.string()) == 2);
  CHECK(run("sim-binary --config /nonexistent.cfg") == 2);
  CHECK(run("no-such-command") == 2);
  const fs::path cfg = out.string() + ".cfg";
  std::ofstream(cfg) << "data = /nonexistent.csv\n";
  CHECK(run("fit-binary --config " + cfg.string() + " --out " + out.string()) == 3);
  CHECK(run("sim-binary --replicates 1 --workers 1 --out " + out.string()) == 0);
  CHECK(fs::exists(out / "sim-binary" / "seed20240601" / "tables" / "summary.csv"));
}
