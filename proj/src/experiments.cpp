#include "bayes_epi/experiments.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <functional>
#include <numeric>
#include <sstream>

#include <omp.h>

#include "bayes_epi/coxnet.hpp"
#include "bayes_epi/decision.hpp"
#include "bayes_epi/error.hpp"
#include "bayes_epi/metrics.hpp"

namespace bayes_epi {
namespace {

// Stream ids for the experiment families; replicate r of family e draws from
// RngStream(seed, mix_stream(e, r)).
constexpr std::uint64_t kBinaryFamily = 1;
constexpr std::uint64_t kHighdimFamily = 2;
constexpr std::uint64_t kSurvivalFamily = 3;
constexpr std::uint64_t kFitBinaryFamily = 4;
constexpr std::uint64_t kTuneCoxFamily = 5;

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value) {
  throw Error(ErrorCode::kInvalidConfig, "invalid value '" + value + "' for key '" + key + "'");
}

template <class T>
T parse_as(const std::string& key, const std::string& value) {
  T out{};
  const char* end = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end) bad_value(key, value);
  return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  bad_value(key, value);
}

Eigen::VectorXd parse_list(const std::string& key, const std::string& value) {
  std::vector<double> v;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) v.push_back(parse_as<double>(key, trim(item)));
  if (v.empty()) bad_value(key, value);
  return Eigen::Map<Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

std::string exact(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string exact_list(const Eigen::VectorXd& v) {
  std::string out;
  for (Eigen::Index k = 0; k < v.size(); ++k) out += (k ? "," : "") + exact(v(k));
  return out;
}

using Setter = std::function<void(ExperimentConfig&, const std::string&, const std::string&)>;
using Getter = std::function<std::string(const ExperimentConfig&)>;

struct Key {
  const char* name;
  Setter set;
  Getter get;
};

template <class T>
Key int_key(const char* name, T ExperimentConfig::*field) {
  return {name, [field](ExperimentConfig& c, const std::string& k, const std::string& v) { c.*field = parse_as<T>(k, v); },
          [field](const ExperimentConfig& c) { return std::to_string(c.*field); }};
}

Key double_key(const char* name, std::function<double&(ExperimentConfig&)> ref) {
  return {name, [ref](ExperimentConfig& c, const std::string& k, const std::string& v) { ref(c) = parse_as<double>(k, v); },
          [ref](const ExperimentConfig& c) { return exact(ref(const_cast<ExperimentConfig&>(c))); }};
}

Key string_key(const char* name, std::string ExperimentConfig::*field) {
  return {name, [field](ExperimentConfig& c, const std::string&, const std::string& v) { c.*field = v; },
          [field](const ExperimentConfig& c) { return c.*field; }};
}

const std::vector<Key>& keys() {
  static const std::vector<Key> table = {
      int_key("seed", &ExperimentConfig::seed),
      int_key("replicates", &ExperimentConfig::replicates),
      int_key("workers", &ExperimentConfig::workers),
      string_key("out", &ExperimentConfig::out),
      string_key("tag", &ExperimentConfig::tag),
      {"n_train",
       [](ExperimentConfig& c, const std::string& k, const std::string& v) {
         c.binary.n_train = c.survival.n_train = parse_as<int>(k, v);
       },
       [](const ExperimentConfig& c) {
         return std::to_string(c.kind == ExperimentKind::kSimSurvival ? c.survival.n_train : c.binary.n_train);
       }},
      {"n_test", [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.binary.n_test = parse_as<int>(k, v); },
       [](const ExperimentConfig& c) { return std::to_string(c.binary.n_test); }},
      {"n_val", [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.survival.n_val = parse_as<int>(k, v); },
       [](const ExperimentConfig& c) { return std::to_string(c.survival.n_val); }},
      {"p",
       [](ExperimentConfig& c, const std::string& k, const std::string& v) {
         c.binary.p = c.survival.p = parse_as<int>(k, v);
       },
       [](const ExperimentConfig& c) {
         return std::to_string(c.kind == ExperimentKind::kSimSurvival ? c.survival.p : c.binary.p);
       }},
      {"beta_star",
       [](ExperimentConfig& c, const std::string& k, const std::string& v) {
         c.binary.beta_star = c.survival.beta_star = parse_list(k, v);
       },
       [](const ExperimentConfig& c) {
         return exact_list(c.kind == ExperimentKind::kSimSurvival ? c.survival.beta_star : c.binary.beta_star);
       }},
      double_key("rho", [](ExperimentConfig& c) -> double& { return c.binary.rho; }),
      double_key("prior_intercept_sd", [](ExperimentConfig& c) -> double& { return c.prior.intercept_sd; }),
      double_key("prior_coef_sd", [](ExperimentConfig& c) -> double& { return c.prior.coef_sd; }),
      int_key("draws", &ExperimentConfig::draws),
      double_key("level", [](ExperimentConfig& c) -> double& { return c.level; }),
      double_key("baseline_rate", [](ExperimentConfig& c) -> double& { return c.survival.baseline_rate; }),
      double_key("censor_rate", [](ExperimentConfig& c) -> double& { return c.survival.censor_rate; }),
      int_key("cv_folds", &ExperimentConfig::cv_folds),
      int_key("path_len", &ExperimentConfig::path_len),
      {"bo_init", [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.bo.init_n = parse_as<int>(k, v); },
       [](const ExperimentConfig& c) { return std::to_string(c.bo.init_n); }},
      {"bo_iters", [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.bo.iters = parse_as<int>(k, v); },
       [](const ExperimentConfig& c) { return std::to_string(c.bo.iters); }},
      double_key("kappa", [](ExperimentConfig& c) -> double& { return c.bo.kappa; }),
      double_key("log_lambda_min", [](ExperimentConfig& c) -> double& { return c.domain.lower(0); }),
      double_key("log_lambda_max", [](ExperimentConfig& c) -> double& { return c.domain.upper(0); }),
      double_key("alpha_min", [](ExperimentConfig& c) -> double& { return c.domain.lower(1); }),
      double_key("alpha_max", [](ExperimentConfig& c) -> double& { return c.domain.upper(1); }),
      string_key("data", &ExperimentConfig::data),
      string_key("label_column", &ExperimentConfig::label_column),
      {"positive_level",
       [](ExperimentConfig& c, const std::string&, const std::string& v) {
         c.positive_level = v.empty() ? std::nullopt : std::optional<std::string>(v);
       },
       [](const ExperimentConfig& c) { return c.positive_level.value_or(""); }},
      string_key("time_column", &ExperimentConfig::time_column),
      string_key("event_column", &ExperimentConfig::event_column),
      double_key("train_fraction", [](ExperimentConfig& c) -> double& { return c.train_fraction; }),
      double_key("cost_fp", [](ExperimentConfig& c) -> double& { return c.cost_fp; }),
      double_key("cost_fn", [](ExperimentConfig& c) -> double& { return c.cost_fn; }),
      {"interval_aware",
       [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.interval_aware = parse_bool(k, v); },
       [](const ExperimentConfig& c) { return std::string(c.interval_aware ? "true" : "false"); }},
  };
  return table;
}

// ---------------------------------------------------------------------------
// Replicate pool

// Runs body(r) for every replicate on `workers` threads. Results land in
// per-replicate slots; the lowest-index failure is rethrown with its index.
template <class Result, class Body>
std::vector<Result> run_replicates(int replicates, int workers, Body body) {
  std::vector<Result> slots(static_cast<std::size_t>(replicates));
  std::vector<std::exception_ptr> failures(static_cast<std::size_t>(replicates));
#pragma omp parallel for num_threads(workers) schedule(dynamic)
  for (int r = 0; r < replicates; ++r) {
    try {
      slots[static_cast<std::size_t>(r)] = body(r);
    } catch (...) {
      failures[static_cast<std::size_t>(r)] = std::current_exception();
    }
  }
  for (int r = 0; r < replicates; ++r) {
    if (!failures[static_cast<std::size_t>(r)]) continue;
    try {
      std::rethrow_exception(failures[static_cast<std::size_t>(r)]);
    } catch (const Error& e) {
      throw Error(e.code(), "replicate " + std::to_string(r) + ": " + e.what());
    } catch (const std::exception& e) {
      throw Error(ErrorCode::kObjectiveFailure, "replicate " + std::to_string(r) + ": " + e.what());
    }
  }
  return slots;
}

RngStream replicate_stream(const ExperimentConfig& c, std::uint64_t family, int r) {
  return RngStream(c.seed, mix_stream(family, static_cast<std::uint64_t>(r)));
}

// Summaries are computed from the formatted per-replicate cells so that a
// reader of the CSV recovers the same means and sds.
double parsed(const std::string& s) {
  double v = std::nan("");
  std::from_chars(s.data(), s.data() + s.size(), v);
  return v;
}

std::pair<std::string, std::string> mean_sd(const std::vector<std::string>& cells) {
  std::vector<double> v;
  for (const auto& c : cells) {
    const double x = parsed(c);
    if (!std::isnan(x)) v.push_back(x);
  }
  if (v.empty()) return {"NA", "NA"};
  const double n = static_cast<double>(v.size());
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  const double sd = v.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
  return {format_value(mean), format_value(sd)};
}

std::vector<std::string> cells_for(const CsvTable& t, const std::string& method, const std::string& column) {
  const std::size_t m = t.column("method"), j = t.column(column);
  std::vector<std::string> out;
  for (const auto& row : t.rows) {
    if (row[m] == method) out.push_back(row[j]);
  }
  return out;
}

CsvTable figure_from(const CsvTable& t, const std::string& column) {
  CsvTable f{{"replicate", "method", column}, {}};
  const std::size_t r = t.column("replicate"), m = t.column("method"), j = t.column(column);
  for (const auto& row : t.rows) {
    if (row[j] != "NA") f.add_row({row[r], row[m], row[j]});
  }
  return f;
}

PlotSpec boxplot(const std::string& title, const std::string& column) {
  return {PlotKind::kBoxplot, title, "method", column, "", "", column, false};
}

std::string term_name(const std::vector<std::string>& names, Eigen::Index k) {
  if (k == 0) return "(Intercept)";
  const auto j = static_cast<std::size_t>(k - 1);
  return j < names.size() ? names[j] : "x" + std::to_string(k);
}

struct BoTables {
  CsvTable history;
  CsvTable trace;
  CsvTable landscape;
};

BoTables bo_tables(const BoHistory& h) {
  BoTables t{{{"round", "log_lambda", "alpha", "c_index", "iteration", "design"}, {}},
             {{"round", "series", "c_index"}, {}},
             {{"log_lambda", "alpha", "c_index"}, {}}};
  const auto best = h.running_best();
  for (std::size_t i = 0; i < h.rows.size(); ++i) {
    const auto& row = h.rows[i];
    const std::string round = std::to_string(row.round);
    const std::string ll = format_value(row.theta(0)), a = format_value(row.theta(1));
    const std::string c = format_value(row.value);
    t.history.add_row({round, ll, a, c, round, row.is_design ? "1" : "0"});
    t.trace.add_row({round, "observed", c});
    t.landscape.add_row({ll, a, c});
  }
  for (std::size_t i = 0; i < h.rows.size(); ++i) {
    t.trace.add_row({std::to_string(h.rows[i].round), "running_best", format_value(best[i])});
  }
  return t;
}

void add_bo_figures(ExperimentOutput& out, const BoTables& t) {
  out.figures["bo_trace"] = t.trace;
  out.figures["bo_landscape"] = t.landscape;
}

const std::map<std::string, PlotSpec>& figure_specs() {
  static const std::map<std::string, PlotSpec> specs = {
      {"auc_boxplot", boxplot("Test AUC by method", "auc")},
      {"brier_boxplot", boxplot("Test Brier score by method", "brier")},
      {"slope_boxplot", boxplot("Calibration slope by method", "calib_slope")},
      {"coverage_boxplot", boxplot("Coverage of predictive intervals", "coverage")},
      {"cindex_boxplot", boxplot("Validation C-index by method", "c_index")},
      {"bo_trace", {PlotKind::kLine, "BO trace", "round", "c_index", "series", "round", "validation C-index", false}},
      {"bo_landscape",
       {PlotKind::kScatter, "Explored hyperparameters", "log_lambda", "alpha", "c_index", "log lambda", "alpha", false}},
      {"roc", {PlotKind::kLine, "ROC curve", "fpr", "tpr", "", "false positive rate", "true positive rate", true}},
      {"calibration",
       {PlotKind::kScatter, "Calibration by decile", "mean_predicted", "observed_proportion", "", "mean predicted",
        "observed proportion", true}},
  };
  return specs;
}

}  // namespace

const char* to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::kSimBinary: return "sim-binary";
    case ExperimentKind::kSimHighdim: return "sim-highdim";
    case ExperimentKind::kSimSurvival: return "sim-survival";
    case ExperimentKind::kFitBinary: return "fit-binary";
    case ExperimentKind::kTuneCox: return "tune-cox";
  }
  return "?";
}

std::optional<ExperimentKind> parse_experiment_kind(const std::string& name) {
  for (auto k : {ExperimentKind::kSimBinary, ExperimentKind::kSimHighdim, ExperimentKind::kSimSurvival,
                 ExperimentKind::kFitBinary, ExperimentKind::kTuneCox}) {
    if (name == to_string(k)) return k;
  }
  return std::nullopt;
}

ExperimentConfig default_config(ExperimentKind kind) {
  ExperimentConfig c;
  c.kind = kind;
  c.domain = {Eigen::Vector2d(-5.0, 0.0), Eigen::Vector2d(1.0, 1.0)};
  c.binary.beta_star.resize(7);
  c.binary.beta_star << -1.0, 1.2, 0.8, -0.6, 0.5, 0.0, -0.8;
  c.survival.beta_star.resize(6);
  c.survival.beta_star << std::log(1.5), std::log(2.0), 0.8, -0.5, 0.0, 0.0;
  switch (kind) {
    case ExperimentKind::kSimBinary:
      c.replicates = 30;
      break;
    case ExperimentKind::kSimHighdim:
      c.replicates = 50;
      c.binary.p = 20;
      c.binary.n_train = 80;
      c.binary.n_test = 1000;
      c.binary.rho = 0.7;
      c.binary.beta_star = Eigen::VectorXd::Zero(21);
      c.binary.beta_star.head(4) << -1.0, 1.2, 0.8, -0.9;
      c.prior = {1.0, 1.0};
      break;
    case ExperimentKind::kSimSurvival:
      c.replicates = 20;
      break;
    case ExperimentKind::kFitBinary:
      // Raw-scale covariates put the intercept far from zero (around -9 for
      // Pima), so only the slopes get the 2.5 prior.
      c.prior = {10.0, 2.5};
      c.level = 0.9;
      break;
    case ExperimentKind::kTuneCox:
      break;
  }
  return c;
}

void ExperimentConfig::validate() const {
  auto fail = [](const std::string& m) { throw Error(ErrorCode::kInvalidConfig, m); };
  if (replicates < 1) fail("replicates must be at least 1");
  if (workers < 1) fail("workers must be at least 1");
  if (out.empty()) fail("out must be set");
  if (!(level > 0.0 && level < 1.0)) fail("level must lie in (0,1)");
  if (draws < 100) fail("draws must be at least 100");
  prior.validate();
  switch (kind) {
    case ExperimentKind::kSimBinary:
    case ExperimentKind::kSimHighdim:
      binary.validate();
      break;
    case ExperimentKind::kSimSurvival:
      survival.validate();
      [[fallthrough]];
    case ExperimentKind::kTuneCox:
      domain.validate();
      if (domain.dim() != 2 || domain.lower(1) < 0.0 || domain.upper(1) > 1.0) {
        fail("alpha bounds must lie in [0,1]");
      }
      if (bo.init_n < 1 || bo.iters < 0 || !(bo.kappa >= 0.0)) fail("invalid BO budget or kappa");
      if (cv_folds < 2 || path_len < 2) fail("cv_folds and path_len must be at least 2");
      break;
    case ExperimentKind::kFitBinary:
      break;
  }
  if (kind == ExperimentKind::kFitBinary || kind == ExperimentKind::kTuneCox) {
    if (data.empty()) fail("data must name a CSV file");
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) fail("train_fraction must lie in (0,1)");
  }
  if (kind == ExperimentKind::kFitBinary) CostSpec(cost_fp, cost_fn);
}

std::filesystem::path ExperimentConfig::output_dir() const {
  return std::filesystem::path(out) / to_string(kind) / (tag.empty() ? "seed" + std::to_string(seed) : tag);
}

void apply_setting(ExperimentConfig& config, const std::string& key, const std::string& value) {
  for (const auto& k : keys()) {
    if (key == k.name) {
      k.set(config, key, value);
      return;
    }
  }
  throw Error(ErrorCode::kInvalidConfig, "unknown config key '" + key + "'");
}

std::vector<std::pair<std::string, std::string>> parse_config_text(const std::string& text) {
  std::vector<std::pair<std::string, std::string>> out;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCode::kInvalidConfig, "config line " + std::to_string(lineno) + ": expected key = value");
    }
    out.emplace_back(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return out;
}

ExperimentConfig load_config(ExperimentKind kind, const std::optional<std::filesystem::path>& file,
                             const std::vector<std::pair<std::string, std::string>>& overrides) {
  ExperimentConfig c = default_config(kind);
  if (file) {
    std::ifstream f(*file);
    if (!f) throw Error(ErrorCode::kInvalidConfig, "cannot read config " + file->string());
    std::stringstream ss;
    ss << f.rdbuf();
    for (const auto& [k, v] : parse_config_text(ss.str())) apply_setting(c, k, v);
  }
  for (const auto& [k, v] : overrides) apply_setting(c, k, v);
  return c;
}

std::string config_snapshot(const ExperimentConfig& config) {
  std::string out = "# experiment = " + std::string(to_string(config.kind)) + "\n";
  for (const auto& k : keys()) out += std::string(k.name) + " = " + k.get(config) + "\n";
  return out;
}

ExperimentOutput run_sim_binary(const ExperimentConfig& c) {
  const bool highdim = c.kind == ExperimentKind::kSimHighdim;
  const std::uint64_t family = highdim ? kHighdimFamily : kBinaryFamily;
  using Rows = std::vector<std::vector<std::string>>;

  const auto per_rep = run_replicates<Rows>(c.replicates, c.workers, [&](int r) {
    const RngStream rng = replicate_stream(c, family, r);
    const auto [train, test] = gen_binary(c.binary, rng.substream(0));
    const std::string rep = std::to_string(r + 1);

    const LaplacePosterior post = fit_map(train, c.prior);
    RngStream draw_rng = rng.substream(1);
    const PredictiveDraws pred = posterior_predict(post, test.x, c.draws, c.level, draw_rng);
    const MetricRecord bayes = evaluate_probabilities(pred.mean, test.y);
    const double cov = coverage(pred.lower, pred.upper, *test.p_true);

    const LogisticFit mle = fit_mle(train);
    const MetricRecord plain = evaluate_probabilities(predict_probs(mle.coef, test.x), test.y);

    auto row = [&](const char* method, const MetricRecord& m, const std::string& cv, bool conv) {
      return std::vector<std::string>{rep, method, format_value(m.auc), format_value(m.brier),
                                      format_value(m.log_loss), format_value(m.calib_intercept),
                                      format_value(m.calib_slope), cv, conv ? "1" : "0"};
    };
    return Rows{row("Bayes", bayes, format_value(cov), post.converged),
                row("MLE", plain, "NA", mle.converged)};
  });

  ExperimentOutput out;
  CsvTable reps{{"replicate", "method", "auc", "brier", "log_loss", "calib_intercept", "calib_slope",
                 "coverage", "converged"},
                {}};
  for (const auto& rows : per_rep) {
    for (const auto& row : rows) reps.add_row(row);
  }
  CsvTable summary{{"method", "n_sim", "auc_mean", "auc_sd", "brier_mean", "brier_sd", "logloss_mean",
                    "logloss_sd", "int_mean", "int_sd", "slope_mean", "slope_sd", "cov_mean", "cov_sd"},
                   {}};
  for (const char* method : {"Bayes", "MLE"}) {
    std::vector<std::string> row{method, std::to_string(c.replicates)};
    for (const char* col : {"auc", "brier", "log_loss", "calib_intercept", "calib_slope", "coverage"}) {
      const auto [m, s] = mean_sd(cells_for(reps, method, col));
      row.push_back(m);
      row.push_back(s);
    }
    summary.add_row(row);
  }
  out.tables["summary"] = summary;
  out.tables["replicates"] = reps;
  out.figures["auc_boxplot"] = figure_from(reps, "auc");
  out.figures["brier_boxplot"] = figure_from(reps, "brier");
  out.figures["slope_boxplot"] = figure_from(reps, "calib_slope");
  out.figures["coverage_boxplot"] = figure_from(reps, "coverage");
  return out;
}

ExperimentOutput run_sim_survival(const ExperimentConfig& c) {
  struct Rep {
    std::vector<std::vector<std::string>> rows;
    BoHistory history;
  };
  const auto per_rep = run_replicates<Rep>(c.replicates, c.workers, [&](int r) {
    const RngStream rng = replicate_stream(c, kSurvivalFamily, r);
    const auto [train, val] = gen_survival(c.survival, rng.substream(0));
    const std::string rep = std::to_string(r + 1);

    const double oracle = c_index(*val.lp_true, val.time, val.event);

    RngStream cv_rng = rng.substream(1);
    const CvResult cv = cv_tune_lasso(train, cv_rng, c.cv_folds, c.path_len);
    const double baseline = validation_c_index(train, val, cv.best_lambda, 1.0);

    RngStream bo_rng = rng.substream(2);
    const Objective objective = [&](const HyperPoint& theta) {
      return validation_c_index(train, val, std::exp(theta(0)), theta(1));
    };
    BoHistory h = bo_run(objective, c.domain, c.bo, bo_rng);

    Rep out;
    out.rows.push_back({rep, "Baseline_cvglmnet", format_value(baseline), format_value(std::log(cv.best_lambda)), "1"});
    out.rows.push_back({rep, "BayesOpt_glmnet", format_value(h.best_value), format_value(h.best_theta(0)),
                        format_value(h.best_theta(1))});
    out.rows.push_back({rep, "Oracle", format_value(oracle), "NA", "NA"});
    out.history = std::move(h);
    return out;
  });

  ExperimentOutput out;
  CsvTable reps{{"replicate", "method", "c_index", "log_lambda", "alpha"}, {}};
  for (const auto& rep : per_rep) {
    for (const auto& row : rep.rows) reps.add_row(row);
  }
  CsvTable summary{{"method", "n_sim", "cindex_mean", "cindex_sd"}, {}};
  for (const char* method : {"Baseline_cvglmnet", "BayesOpt_glmnet", "Oracle"}) {
    const auto [m, s] = mean_sd(cells_for(reps, method, "c_index"));
    summary.add_row({method, std::to_string(c.replicates), m, s});
  }
  const BoTables bo = bo_tables(per_rep.front().history);
  out.tables["summary"] = summary;
  out.tables["replicates"] = reps;
  out.tables["bo_history"] = bo.history;
  out.figures["cindex_boxplot"] = figure_from(reps, "c_index");
  add_bo_figures(out, bo);
  return out;
}

ExperimentOutput run_fit_binary(const ExperimentConfig& c) {
  const LabeledDataset data = load_csv_binary(c.data, c.label_column, c.positive_level);
  RngStream rng(c.seed, mix_stream(kFitBinaryFamily, 0));
  RngStream split_rng = rng.substream(0);
  const auto [train_rows, test_rows] = split_indices(data.size(), c.train_fraction, split_rng);
  const LabeledDataset train = subset(data, train_rows);
  const LabeledDataset test = subset(data, test_rows);

  const LaplacePosterior post = fit_map(train, c.prior);
  RngStream coef_rng = rng.substream(1);
  const Eigen::MatrixXd draws = sample_coefficients(post, c.draws, coef_rng);

  ExperimentOutput out;
  CsvTable posterior{{"term", "mean", "sd", "q2.5", "q97.5"}, {}};
  for (Eigen::Index k = 0; k < draws.rows(); ++k) {
    std::vector<double> v(static_cast<std::size_t>(draws.cols()));
    for (Eigen::Index s = 0; s < draws.cols(); ++s) v[static_cast<std::size_t>(s)] = draws(k, s);
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    std::sort(v.begin(), v.end());
    posterior.add_row({term_name(data.feature_names, k), format_value(mean),
                       format_value(std::sqrt(ss / static_cast<double>(v.size() - 1))),
                       format_value(kernels::sorted_quantile(v, 0.025)),
                       format_value(kernels::sorted_quantile(v, 0.975))});
  }

  RngStream pred_rng = rng.substream(2);
  const PredictiveDraws pred = posterior_predict(post, test.x, c.draws, c.level, pred_rng);
  const CostSpec costs(c.cost_fp, c.cost_fn);
  const ScreeningDecision dec = c.interval_aware ? decide_interval_aware(pred.mean, pred.upper, costs)
                                                 : decide(pred.mean, costs);

  CsvTable predictions{{"subject", "y", "mean", "lower", "upper"}, {}};
  CsvTable decisions{{"subject", "mean", "upper", "threshold", "loss_screen", "loss_noscreen", "screen"}, {}};
  for (Eigen::Index i = 0; i < test.size(); ++i) {
    const std::string subject = std::to_string(test_rows[static_cast<std::size_t>(i)] + 1);
    predictions.add_row({subject, std::to_string(test.y(i)), format_value(pred.mean(i)), format_value(pred.lower(i)),
                         format_value(pred.upper(i))});
    decisions.add_row({subject, format_value(pred.mean(i)), format_value(pred.upper(i)), format_value(dec.threshold),
                       format_value(dec.expected_loss_screen(i)), format_value(dec.expected_loss_noscreen(i)),
                       std::to_string(dec.decisions(i))});
  }

  CsvTable deciles{{"bin", "mean_predicted", "observed_proportion", "n"}, {}};
  for (const auto& d : decile_table(pred.mean, test.y)) {
    deciles.add_row({std::to_string(d.bin), format_value(d.mean_predicted), format_value(d.observed_proportion),
                     std::to_string(d.n)});
  }
  CsvTable roc{{"fpr", "tpr", "threshold"}, {}};
  for (const auto& p : roc_curve(pred.mean, test.y)) {
    roc.add_row({format_value(p.fpr), format_value(p.tpr), format_value(p.threshold)});
  }
  const MetricRecord m = evaluate_probabilities(pred.mean, test.y);
  CsvTable metrics{{"n_train", "n_test", "auc", "brier", "log_loss", "calib_intercept", "calib_slope"}, {}};
  metrics.add_row({std::to_string(train.size()), std::to_string(test.size()), format_value(m.auc),
                   format_value(m.brier), format_value(m.log_loss), format_value(m.calib_intercept),
                   format_value(m.calib_slope)});

  out.tables["posterior_summary"] = posterior;
  out.tables["predictions"] = predictions;
  out.tables["decisions"] = decisions;
  out.tables["deciles"] = deciles;
  out.tables["roc"] = roc;
  out.tables["metrics"] = metrics;
  out.figures["roc"] = roc;
  CsvTable calib{{"bin", "mean_predicted", "observed_proportion"}, {}};
  for (const auto& row : deciles.rows) calib.add_row({row[0], row[1], row[2]});
  out.figures["calibration"] = calib;
  return out;
}

ExperimentOutput run_tune_cox(const ExperimentConfig& c) {
  const SurvivalData data = load_csv_survival(c.data, c.time_column, c.event_column);
  RngStream rng(c.seed, mix_stream(kTuneCoxFamily, 0));
  RngStream split_rng = rng.substream(0);
  const auto [train_rows, val_rows] = split_indices(data.size(), c.train_fraction, split_rng);
  const SurvivalData train = subset(data, train_rows);
  const SurvivalData val = subset(data, val_rows);

  RngStream bo_rng = rng.substream(1);
  const Objective objective = [&](const HyperPoint& theta) {
    return validation_c_index(train, val, std::exp(theta(0)), theta(1));
  };
  const BoHistory h = bo_run(objective, c.domain, c.bo, bo_rng);

  CoxFitConfig cfg;
  cfg.lambda = std::exp(h.best_theta(0));
  cfg.alpha = h.best_theta(1);
  const CoxFit fit = fit_coxnet(train, cfg);
  const double refit = c_index(predict_risk(fit, val.x), val.time, val.event);

  ExperimentOutput out;
  const BoTables bo = bo_tables(h);
  out.tables["bo_history"] = bo.history;
  CsvTable best{{"round", "log_lambda", "alpha", "c_index", "refit_c_index", "active_set", "n_train", "n_val"}, {}};
  best.add_row({std::to_string(h.best_round), format_value(h.best_theta(0)), format_value(h.best_theta(1)),
                format_value(h.best_value), format_value(refit), std::to_string(fit.active_set_size),
                std::to_string(train.size()), std::to_string(val.size())});
  out.tables["best_config"] = best;
  CsvTable coef{{"term", "beta_standardized"}, {}};
  for (Eigen::Index j = 0; j < fit.beta.size(); ++j) {
    coef.add_row({j < static_cast<Eigen::Index>(data.feature_names.size()) ? data.feature_names[static_cast<std::size_t>(j)]
                                                                           : "x" + std::to_string(j + 1),
                  format_value(fit.beta(j))});
  }
  out.tables["coefficients"] = coef;
  add_bo_figures(out, bo);
  return out;
}

ExperimentOutput run_experiment(const ExperimentConfig& config) {
  config.validate();
  ExperimentOutput out;
  switch (config.kind) {
    case ExperimentKind::kSimBinary:
    case ExperimentKind::kSimHighdim: out = run_sim_binary(config); break;
    case ExperimentKind::kSimSurvival: out = run_sim_survival(config); break;
    case ExperimentKind::kFitBinary: out = run_fit_binary(config); break;
    case ExperimentKind::kTuneCox: out = run_tune_cox(config); break;
  }
  out.dir = config.output_dir();
  std::error_code ec;
  std::filesystem::create_directories(out.dir / "tables", ec);
  if (!ec) std::filesystem::create_directories(out.dir / "figures", ec);
  if (ec) throw Error(ErrorCode::kInvalidConfig, "cannot create " + out.dir.string() + ": " + ec.message());
  for (const auto& [name, table] : out.tables) table.write(out.dir / "tables" / (name + ".csv"));
  for (const auto& [name, table] : out.figures) {
    write_figure(out.dir / "figures", name, table, figure_specs().at(name));
  }
  std::ofstream snap(out.dir / "config.snapshot", std::ios::binary);
  if (!snap) throw Error(ErrorCode::kInvalidConfig, "cannot write config snapshot");
  snap << config_snapshot(config);
  return out;
}

}  // namespace bayes_epi
