#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <string>

#include "bayes_epi/datagen.hpp"
#include "bayes_epi/error.hpp"
#include "doctest.h"

using namespace bayes_epi;

namespace {

double correlation(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const Eigen::ArrayXd x = a.array() - a.mean(), y = b.array() - b.mean();
  return (x * y).sum() / std::sqrt(x.square().sum() * y.square().sum());
}

std::filesystem::path write_temp(const std::string& name, const std::string& body) {
  const auto path = std::filesystem::temp_directory_path() / ("bayes_epi_test_" + name);
  std::ofstream(path) << body;
  return path;
}

BinSimConfig binary_config(int p, double rho, int n) {
  BinSimConfig c;
  c.p = p;
  c.rho = rho;
  c.n_train = n;
  c.n_test = 10;
  c.beta_star = Eigen::VectorXd::Zero(p + 1);
  return c;
}

SurvSimConfig survival_config(int n, double censor_rate) {
  SurvSimConfig c;
  c.n_train = n;
  c.n_val = 10;
  c.p = 2;
  c.beta_star = Eigen::VectorXd::Zero(2);
  c.censor_rate = censor_rate;
  return c;
}

}  // namespace

TEST_CASE("rng streams are reproducible and substreams differ") {
  RngStream a(42, 7), b(42, 7), c(42, 8);
  bool differs = false;
  for (int i = 0; i < 100; ++i) {
    const double x = a.uniform();
    CHECK(x == b.uniform());
    CHECK(x >= 0.0);
    CHECK(x < 1.0);
    differs = differs || x != c.uniform();
  }
  CHECK(differs);
  CHECK(a.substream(3).stream_id() == b.substream(3).stream_id());
  CHECK(a.substream(3).stream_id() != a.substream(4).stream_id());
}

TEST_CASE("exponential draws have the right mean") {
  RngStream rng(1, 1);
  double s = 0.0;
  for (int i = 0; i < 20000; ++i) s += rng.exponential(0.5);
  CHECK(s / 20000.0 == doctest::Approx(2.0).epsilon(0.03));
}

TEST_CASE("independent covariates are uncorrelated") {
  const auto [train, test] = gen_binary(binary_config(2, 0.0, 10000), RngStream(3, 0));
  CHECK(std::fabs(correlation(train.x.col(0), train.x.col(1))) < 0.05);
}

TEST_CASE("AR(1) covariance structure") {
  const auto [train, test] = gen_binary(binary_config(20, 0.7, 20000), RngStream(4, 0));
  CHECK(correlation(train.x.col(4), train.x.col(5)) == doctest::Approx(0.7).epsilon(0.03 / 0.7));
  CHECK(correlation(train.x.col(4), train.x.col(6)) == doctest::Approx(0.49).epsilon(0.03 / 0.49));
  const Eigen::MatrixXd centered = train.x.rowwise() - train.x.colwise().mean();
  const Eigen::MatrixXd cov = centered.transpose() * centered / (train.x.rows() - 1.0);
  CHECK((cov - ar1_correlation(20, 0.7)).cwiseAbs().maxCoeff() <= 0.05);
}

TEST_CASE("zero coefficients give balanced labels") {
  const auto [train, test] = gen_binary(binary_config(3, 0.0, 10000), RngStream(5, 0));
  CHECK(train.y.cast<double>().mean() == doctest::Approx(0.5).epsilon(0.06));
}

TEST_CASE("labels follow p_true within deciles") {
  BinSimConfig c = binary_config(2, 0.0, 20000);
  c.beta_star << -0.3, 1.5, -1.0;
  const auto [train, test] = gen_binary(c, RngStream(6, 0));
  std::vector<Eigen::Index> order(static_cast<std::size_t>(train.size()));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return (*train.p_true)(a) < (*train.p_true)(b); });
  for (int bin = 0; bin < 10; ++bin) {
    double p = 0.0, y = 0.0;
    for (int k = 0; k < 2000; ++k) {
      const auto i = order[static_cast<std::size_t>(bin * 2000 + k)];
      p += (*train.p_true)(i);
      y += train.y(i);
    }
    CHECK(std::fabs(p - y) / 2000.0 <= 0.04);
  }
}

TEST_CASE("generators are deterministic per seed and stream") {
  BinSimConfig c = binary_config(4, 0.3, 200);
  c.beta_star << 0.1, 1, -1, 0.5, 0;
  const auto a = gen_binary(c, RngStream(9, 2));
  const auto b = gen_binary(c, RngStream(9, 2));
  CHECK(a.first.x == b.first.x);
  CHECK(a.first.y == b.first.y);
  CHECK(a.second.x == b.second.x);
  const auto other = gen_binary(c, RngStream(9, 3));
  CHECK(other.first.x != a.first.x);
}

TEST_CASE("adjacent streams are uncorrelated") {
  const auto a = gen_binary(binary_config(3, 0.0, 10000), RngStream(10, 5));
  const auto b = gen_binary(binary_config(3, 0.0, 10000), RngStream(10, 6));
  for (int j = 0; j < 3; ++j) {
    CHECK(std::fabs(correlation(a.first.x.col(j), b.first.x.col(j))) <= 4.0 / 100.0);
  }
}

TEST_CASE("binary config validation") {
  BinSimConfig c = binary_config(3, 1.0, 10);
  CHECK_THROWS_AS(c.validate(), Error);
  c.rho = 0.2;
  c.beta_star = Eigen::VectorXd::Zero(3);
  CHECK_THROWS_AS(gen_binary(c, RngStream(1, 1)), Error);
}

TEST_CASE("survival event fraction and exponential mean") {
  const auto [train, val] = gen_survival(survival_config(10000, 0.05), RngStream(20, 0));
  CHECK(train.event.cast<double>().mean() == doctest::Approx(2.0 / 3.0).epsilon(0.03 * 1.5));
  const auto [all_events, v2] = gen_survival(survival_config(10000, 0.0), RngStream(21, 0));
  CHECK(all_events.event.sum() == 10000);
  CHECK(all_events.time.mean() == doctest::Approx(10.0).epsilon(0.05));
}

TEST_CASE("survival shapes in the reference regime") {
  SurvSimConfig c;
  c.beta_star.resize(6);
  c.beta_star << std::log(1.5), std::log(2.0), 0.8, -0.5, 0.0, 0.0;
  const auto [train, val] = gen_survival(c, RngStream(22, 0));
  CHECK(train.x.rows() == 400);
  CHECK(train.x.cols() == 6);
  CHECK(val.x.rows() == 200);
  CHECK(val.x.cols() == 6);
  CHECK((train.time.array() >= 0.0).all());
  CHECK(train.lp_true.has_value());
  CHECK(((train.x * c.beta_star) - *train.lp_true).norm() == 0.0);
}

TEST_CASE("survival config validation") {
  SurvSimConfig c = survival_config(10, -1.0);
  CHECK_THROWS_AS(c.validate(), Error);
  c.censor_rate = 0.1;
  c.baseline_rate = 0.0;
  CHECK_THROWS_AS(c.validate(), Error);
}

TEST_CASE("CSV label coding with a positive level") {
  const auto path = write_temp("labels.csv", "a,b,label\n1,2,pos\n3,4,neg\n5,6,pos\n");
  const auto d = load_csv_binary(path.string(), "label", std::string("pos"));
  REQUIRE(d.size() == 3);
  CHECK(d.y(0) == 1);
  CHECK(d.y(1) == 0);
  CHECK(d.y(2) == 1);
  CHECK(d.feature_names == std::vector<std::string>{"a", "b"});
  CHECK(d.x(1, 1) == 4.0);
  CHECK_FALSE(d.p_true.has_value());
  const auto auto_coded = load_csv_binary(path.string(), "label");
  CHECK(auto_coded.y == d.y);
}

TEST_CASE("CSV non-numeric covariate reports its row and column") {
  std::string body = "a,b,y\n";
  for (int r = 1; r <= 8; ++r) body += (r == 7 ? std::string("1,oops,0\n") : "1," + std::to_string(r) + ",1\n");
  const auto path = write_temp("bad_cell.csv", body);
  try {
    load_csv_binary(path.string(), "y");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.row() == 7);
    CHECK(e.column() == "b");
    CHECK(e.code() == ErrorCode::kParseError);
  }
}

TEST_CASE("CSV ingestion errors") {
  CHECK_THROWS_AS(load_csv_binary("/nonexistent/file.csv", "y"), Error);
  try {
    load_csv_binary("/nonexistent/file.csv", "y");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kFileNotFound);
  }
  const auto three = write_temp("three.csv", "x,y\n1,a\n2,b\n3,c\n");
  try {
    load_csv_binary(three.string(), "y");
    FAIL("expected NonBinaryLabel");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kNonBinaryLabel);
  }
  const auto missing = write_temp("missing.csv", "x,y\n1,0\n,1\n");
  CHECK_THROWS_AS(load_csv_binary(missing.string(), "y"), ParseError);
  const auto neg = write_temp("neg_time.csv", "x,time,status\n1,2.5,1\n2,-1,0\n");
  try {
    load_csv_survival(neg.string(), "time", "status");
    FAIL("expected a time violation");
  } catch (const ParseError& e) {
    CHECK(e.row() == 2);
    CHECK(e.column() == "time");
  }
}

TEST_CASE("CSV categorical columns use treatment coding") {
  const auto path = write_temp("cat.csv",
                               "grade,age,time,status\nII,50,3,1\nI,40,4,0\nIII,60,5,1\nII,55,6,1\n");
  const auto d = load_csv_survival(path.string(), "time", "status");
  CHECK(d.feature_names == std::vector<std::string>{"gradeII", "gradeIII", "age"});
  CHECK(d.x(0, 0) == 1.0);
  CHECK(d.x(1, 0) == 0.0);
  CHECK(d.x(1, 1) == 0.0);
  CHECK(d.x(2, 1) == 1.0);
  CHECK(d.event_count() == 3);
}

TEST_CASE("bundled fixtures load") {
  const auto pima = load_csv_binary(BAYES_EPI_TEST_DATA "/pima_complete_cases.csv", "diabetes");
  CHECK(pima.size() == 532);
  CHECK(pima.y.sum() == 177);
  const auto gbsg = load_csv_survival(BAYES_EPI_TEST_DATA "/gbsg2.csv", "time", "cens");
  CHECK(gbsg.size() == 686);
  CHECK(gbsg.event_count() == 299);
}

TEST_CASE("split_indices is a seeded partition") {
  RngStream a(5, 5), b(5, 5);
  const auto [tr, te] = split_indices(768, 0.7, a);
  CHECK(tr.size() == 537);
  CHECK(te.size() == 231);
  std::vector<Eigen::Index> all = tr;
  all.insert(all.end(), te.begin(), te.end());
  std::sort(all.begin(), all.end());
  for (std::size_t i = 0; i < all.size(); ++i) CHECK(all[i] == static_cast<Eigen::Index>(i));
  CHECK(split_indices(768, 0.7, b).first == tr);
}
