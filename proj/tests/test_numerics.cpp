#include <cmath>

#include "bayes_epi/error.hpp"
#include "bayes_epi/numerics.hpp"
#include "bayes_epi/rng.hpp"
#include "doctest.h"

using namespace bayes_epi;

namespace {

Eigen::MatrixXd random_spd(Eigen::Index d, RngStream& rng) {
  Eigen::MatrixXd b(d, d);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j) b(i, j) = rng.normal();
  return b.transpose() * b + Eigen::MatrixXd::Identity(d, d);
}

}  // namespace

TEST_CASE("cholesky of identity is identity") {
  const auto f = cholesky(Eigen::MatrixXd::Identity(3, 3));
  CHECK((f.lower - Eigen::MatrixXd::Identity(3, 3)).norm() == 0.0);
  CHECK(f.jitter == 0.0);
}

TEST_CASE("cholesky of a 2x2 matches the hand factor") {
  Eigen::Matrix2d m;
  m << 4, 2, 2, 3;
  const auto f = cholesky(m);
  CHECK(f.lower(0, 0) == doctest::Approx(2.0));
  CHECK(f.lower(1, 0) == doctest::Approx(1.0));
  CHECK(f.lower(1, 1) == doctest::Approx(std::sqrt(2.0)));
  CHECK(f.lower(0, 1) == 0.0);
}

TEST_CASE("indefinite and asymmetric inputs are rejected") {
  Eigen::Matrix2d m;
  m << 1, 2, 2, 1;
  CHECK_THROWS_AS(cholesky(m), Error);
  try {
    cholesky(m);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kNotPositiveDefinite);
  }
  Eigen::Matrix2d a;
  a << 2, 1, 0, 2;
  CHECK_THROWS_AS(cholesky(a), Error);
  CHECK_THROWS_AS(cholesky(Eigen::MatrixXd::Ones(2, 3)), Error);
}

TEST_CASE("near-singular input succeeds through jitter") {
  Eigen::Matrix2d m;
  m << 1, 1, 1, 1;
  const auto f = cholesky(m);
  CHECK(f.jitter > 0.0);
  CHECK(f.jitter <= 1e-6 * m.trace() / 2.0);
}

TEST_CASE("solve_spd on small systems") {
  const auto id = cholesky(Eigen::MatrixXd::Identity(2, 2));
  const Eigen::VectorXd x = solve_spd(id, Eigen::Vector2d(3, -1));
  CHECK(x(0) == 3.0);
  CHECK(x(1) == -1.0);

  Eigen::Matrix2d m;
  m << 4, 2, 2, 3;
  const Eigen::VectorXd y = solve_spd(cholesky(m), Eigen::Vector2d(10, 8));
  CHECK(y(0) == doctest::Approx(7.0 / 4.0).epsilon(1e-14));
  CHECK(y(1) == doctest::Approx(3.0 / 2.0).epsilon(1e-14));

  CHECK_THROWS_AS(solve_spd(id, Eigen::VectorXd::Ones(3)), Error);
}

TEST_CASE("random SPD reconstruction and solve accuracy") {
  RngStream rng(11, 0);
  for (int trial = 0; trial < 50; ++trial) {
    const Eigen::Index d = 1 + trial % 20;
    const Eigen::MatrixXd a = random_spd(d, rng);
    const auto f = cholesky(a);
    CHECK((f.reconstruct() - a).norm() / a.norm() <= 1e-10);
    for (Eigen::Index i = 0; i < d; ++i) CHECK(f.lower(i, i) > 0.0);
    Eigen::VectorXd x(d);
    for (Eigen::Index i = 0; i < d; ++i) x(i) = rng.normal();
    const Eigen::VectorXd got = solve_spd(f, Eigen::VectorXd(a * x));
    CHECK((got - x).norm() / x.norm() <= 1e-8);
  }
}

TEST_CASE("log determinant and inverse agree with Eigen") {
  RngStream rng(12, 0);
  const Eigen::MatrixXd a = random_spd(6, rng);
  const auto f = cholesky(a);
  CHECK(f.log_determinant() == doctest::Approx(std::log(a.determinant())).epsilon(1e-10));
  CHECK((spd_inverse(f) * a - Eigen::MatrixXd::Identity(6, 6)).norm() < 1e-10);
}

TEST_CASE("stable_sigmoid values and exact symmetry") {
  CHECK(stable_sigmoid(0.0) == 0.5);
  CHECK(stable_sigmoid(500.0) > 1.0 - 1e-12);
  CHECK(stable_sigmoid(500.0) <= 1.0);
  CHECK(stable_sigmoid(std::log(3.0)) == doctest::Approx(0.75).epsilon(1e-15));
  CHECK(std::isfinite(stable_sigmoid(-700.0)));
  RngStream rng(13, 0);
  for (int i = 0; i < 1000; ++i) {
    const double z = -50.0 + 100.0 * rng.uniform();
    CHECK(stable_sigmoid(z) + stable_sigmoid(-z) == 1.0);
    CHECK(stable_sigmoid(z) == 1.0 - stable_sigmoid(-z));
  }
  double prev = 0.0;
  for (double z = -40.0; z <= 40.0; z += 0.25) {
    CHECK(stable_sigmoid(z) >= prev);
    prev = stable_sigmoid(z);
  }
}

TEST_CASE("log1pexp branches") {
  CHECK(log1pexp(0.0) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
  CHECK(log1pexp(-1000.0) >= 0.0);
  CHECK(log1pexp(-1000.0) <= 1e-300);
  CHECK(log1pexp(1000.0) == 1000.0);
  for (double z : {-30.0, -5.0, -0.3, 0.7, 4.0, 20.0, 34.0, 36.0}) {
    CHECK(log1pexp(z) == doctest::Approx(std::log1p(std::exp(z))).epsilon(1e-12));
  }
}

TEST_CASE("logit inverts the sigmoid") {
  for (double p : {1e-6, 0.1, 0.5, 0.9, 1.0 - 1e-6}) {
    CHECK(stable_sigmoid(logit(p)) == doctest::Approx(p).epsilon(1e-12));
  }
}
