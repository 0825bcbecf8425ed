#include <cmath>
#include <stdexcept>

#include "bayes_epi/error.hpp"
#include "bayes_epi/gp_bo.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace bayes_epi;

namespace {

KernelParams iso(Eigen::Index d, double ls, double v) { return {Eigen::VectorXd::Constant(d, ls), v}; }

Eigen::MatrixXd col(std::initializer_list<double> v) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(v.size()), 1);
  Eigen::Index i = 0;
  for (double x : v) m(i++, 0) = x;
  return m;
}

Eigen::VectorXd vec(std::initializer_list<double> v) { return col(v).col(0); }

HyperPoint at(double x) { return Eigen::VectorXd::Constant(1, x); }

}  // namespace

TEST_CASE("noise-free interpolation of a single observation") {
  const auto s = gp_condition(col({0.4}), vec({1.7}), iso(1, 0.2, 1.0), 0.0);
  const auto p = gp_posterior(s, at(0.4));
  CHECK(p.mean == doctest::Approx(1.7));
  CHECK(p.sd * p.sd <= 1e-10);
}

TEST_CASE("far-apart observations decorrelate") {
  const auto s = gp_condition(col({0.0, 1.0}), vec({1.0, -1.0}), iso(1, 0.04, 2.0), 1e-6);
  const auto p = gp_posterior(s, at(0.5));
  CHECK(std::fabs(p.sd * p.sd - 2.0) <= 1e-6);
  CHECK(p.mean == doctest::Approx(0.0).epsilon(1e-6));
}

TEST_CASE("far queries revert to the prior") {
  const auto s = gp_condition(col({0.1}), vec({3.0}), iso(1, 0.05, 0.5), 1e-6);
  const auto p = gp_posterior(s, at(0.95));
  CHECK(p.mean == doctest::Approx(3.0));
  CHECK(p.sd == doctest::Approx(std::sqrt(0.5)).epsilon(1e-9));
  CHECK(ucb(s, at(0.95), 2.0) == doctest::Approx(3.0 + 2.0 * std::sqrt(0.5)).epsilon(1e-9));
}

TEST_CASE("sine recovery from five points") {
  const Domain dom{vec({0.0}), vec({3.0})};
  const Eigen::MatrixXd x = col({0.0, 0.75, 1.5, 2.25, 3.0});
  Eigen::VectorXd y(5);
  for (int i = 0; i < 5; ++i) y(i) = std::sin(x(i, 0));
  const auto s = gp_condition(x, y, iso(1, 0.3, 1.0), 1e-6, dom);
  for (double q : {0.4, 1.1, 1.9, 2.6}) {
    const auto ref = oracle::gp_direct(x / 3.0, y, Eigen::VectorXd::Constant(1, 0.3), 1.0, 1e-6,
                                       Eigen::VectorXd::Constant(1, q / 3.0));
    CHECK(gp_posterior(s, at(q)).mean == doctest::Approx(ref.mean).epsilon(1e-8));
    CHECK(std::fabs(gp_posterior(s, at(q)).mean - std::sin(q)) <= 0.05);
  }
}

TEST_CASE("posterior matches the direct-inverse formula") {
  RngStream rng(90, 0);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::Index t = 3 + trial % 6;
    Eigen::MatrixXd x(t, 2);
    Eigen::VectorXd y(t);
    for (Eigen::Index i = 0; i < t; ++i) {
      x(i, 0) = rng.uniform();
      x(i, 1) = rng.uniform();
      y(i) = rng.normal();
    }
    const KernelParams k{Eigen::Vector2d(0.2 + rng.uniform(), 0.2 + rng.uniform()), 0.5 + rng.uniform()};
    const double noise = 1e-3 + 0.1 * rng.uniform();
    const auto s = gp_condition(x, y, k, noise);
    for (int q = 0; q < 5; ++q) {
      const Eigen::Vector2d u(rng.uniform(), rng.uniform());
      const auto ref = oracle::gp_direct(x, y, k.lengthscales, k.variance, noise, u);
      const auto got = gp_posterior(s, u);
      CHECK(std::fabs(got.mean - ref.mean) <= 1e-8);
      CHECK(std::fabs(got.sd * got.sd - ref.var) <= 1e-8);
      CHECK(ucb(s, u, 0.0) == got.mean);
      CHECK(ucb(s, u, 1.5) == got.mean + 1.5 * got.sd);
    }
  }
}

TEST_CASE("observed points have tiny sd without noise") {
  const Eigen::MatrixXd x = col({0.1, 0.35, 0.6, 0.9});
  const auto s = gp_condition(x, vec({1, 2, 0, 1}), iso(1, 0.2, 4.0), 0.0);
  for (Eigen::Index i = 0; i < 4; ++i) CHECK(gp_posterior(s, at(x(i, 0))).sd <= 1e-5 * 2.0);
}

TEST_CASE("huge noise collapses the posterior to the prior") {
  const auto s = gp_condition(col({0.2, 0.5, 0.8}), vec({1, 4, 2}), iso(1, 0.3, 1.0), 1e6);
  const auto p = gp_posterior(s, at(0.5));
  CHECK(p.mean == doctest::Approx(7.0 / 3.0).epsilon(0.01));
  CHECK(p.sd == doctest::Approx(1.0).epsilon(0.01));
}

TEST_CASE("invalid kernels and empty data are rejected") {
  CHECK_THROWS_AS(gp_condition(col({0.1}), vec({1.0}), iso(1, 0.0, 1.0), 0.0), Error);
  CHECK_THROWS_AS(gp_condition(Eigen::MatrixXd(0, 1), Eigen::VectorXd(0), iso(1, 0.1, 1.0), 0.0), Error);
  CHECK_THROWS_AS((Domain{vec({1.0}), vec({0.0})}.validate()), Error);
}

TEST_CASE("hyperparameter fit stays in bounds and improves the evidence") {
  const Eigen::MatrixXd x = col({0.05, 0.2, 0.4, 0.55, 0.7, 0.9});
  Eigen::VectorXd y(6);
  for (int i = 0; i < 6; ++i) y(i) = -std::pow(x(i, 0) - 0.3, 2);
  const Domain dom = Domain::unit(1);
  const auto hp = fit_gp_hyperparameters(x, y, dom);
  CHECK(hp.kernel.lengthscales(0) >= 0.05 - 1e-12);
  CHECK(hp.kernel.lengthscales(0) <= 2.0 + 1e-12);
  CHECK(hp.kernel.variance >= 1e-4 - 1e-16);
  CHECK(hp.kernel.variance <= 4.0 + 1e-12);
  CHECK(hp.noise_variance >= 1e-6 - 1e-18);
  CHECK(hp.noise_variance <= 1.0 + 1e-12);
  const double fitted = log_marginal_likelihood(GpSurrogate(dom, x, y, hp.kernel, hp.noise_variance));
  CHECK(fitted == doctest::Approx(hp.log_marginal_likelihood));
  CHECK(fitted >= log_marginal_likelihood(GpSurrogate(dom, x, y, iso(1, 0.3, 1.0), 0.01)));
}

TEST_CASE("exploitation proposes near the best observation") {
  const Eigen::MatrixXd x = col({0.1, 0.3, 0.5, 0.7, 0.9});
  const auto s = gp_condition(x, vec({0.0, 0.2, 1.0, 0.1, 0.0}), iso(1, 0.15, 0.5), 1e-4);
  RngStream rng(91, 0);
  const HyperPoint next = propose_next(s, Domain::unit(1), 0.0, rng);
  CHECK(std::fabs(next(0) - 0.5) <= 0.05);
}

TEST_CASE("large kappa proposes where the sd is largest") {
  const auto s = gp_condition(col({0.0, 1.0}), vec({0.0, 0.0}), iso(1, 0.3, 1.0), 1e-6);
  RngStream rng(92, 0);
  const HyperPoint next = propose_next(s, Domain::unit(1), 1e6, rng);
  double best_x = 0.0, best_sd = -1.0;
  for (int i = 0; i <= 10000; ++i) {
    const double q = i / 10000.0;
    const double sd = gp_posterior(s, at(q)).sd;
    if (sd > best_sd) best_sd = sd, best_x = q;
  }
  CHECK(std::fabs(next(0) - best_x) <= 0.01);
  CHECK(std::fabs(next(0) - 0.5) <= 0.01);
}

TEST_CASE("proposals are deterministic, inside the box and dominate the candidates") {
  const Domain dom{Eigen::Vector2d(-5, 0), Eigen::Vector2d(1, 1)};
  RngStream data_rng(93, 0);
  const Eigen::MatrixXd x = space_filling_design(dom, 6, data_rng);
  Eigen::VectorXd y(6);
  for (int i = 0; i < 6; ++i) y(i) = std::sin(x(i, 0)) + x(i, 1);
  const auto s = gp_condition(x, y, {Eigen::Vector2d(0.3, 0.4), 1.0}, 1e-4, dom);
  RngStream a(94, 0), b(94, 0), c(94, 0);
  const HyperPoint p1 = propose_next(s, dom, 2.576, a);
  const HyperPoint p2 = propose_next(s, dom, 2.576, b);
  CHECK(p1 == p2);
  CHECK(dom.contains(p1));
  const Eigen::MatrixXd cand = halton_points(2048, 2, c);
  const double best = ucb(s, p1, 2.576);
  for (Eigen::Index i = 0; i < cand.rows(); ++i) {
    CHECK(ucb(s, dom.from_unit(cand.row(i).transpose()), 2.576) <= best + 1e-12);
  }
}

TEST_CASE("Halton design covers the box") {
  RngStream rng(95, 0);
  const Domain dom{Eigen::Vector2d(-5, 0), Eigen::Vector2d(1, 1)};
  const Eigen::MatrixXd d = space_filling_design(dom, 64, rng);
  int quadrant[4] = {0, 0, 0, 0};
  for (Eigen::Index i = 0; i < d.rows(); ++i) {
    CHECK(dom.contains(d.row(i).transpose()));
    quadrant[(d(i, 0) > -2.0 ? 1 : 0) + (d(i, 1) > 0.5 ? 2 : 0)]++;
  }
  for (int q : quadrant) CHECK(q >= 12);
}

TEST_CASE("bo_run finds the quadratic maximizer") {
  const Domain dom = Domain::unit(1);
  RngStream rng(96, 0);
  const auto h = bo_run([](const HyperPoint& t) { return -std::pow(t(0) - 0.3, 2); }, dom, BoOptions{}, rng);
  CHECK(h.rows.size() == 20);
  CHECK(std::fabs(h.best_theta(0) - 0.3) <= 0.05);
  int design = 0;
  for (std::size_t i = 0; i < h.rows.size(); ++i) {
    CHECK(h.rows[i].round == static_cast<int>(i) + 1);
    design += h.rows[i].is_design ? 1 : 0;
  }
  CHECK(design == 5);
  const auto best = h.running_best();
  for (std::size_t i = 1; i < best.size(); ++i) CHECK(best[i] >= best[i - 1]);
  CHECK(best.back() == h.best_value);
  CHECK(h.rows[static_cast<std::size_t>(h.best_round - 1)].value == h.best_value);
  for (int r = 0; r < h.best_round - 1; ++r) CHECK(h.rows[static_cast<std::size_t>(r)].value < h.best_value);
}

TEST_CASE("constant objective is recorded in full") {
  RngStream rng(97, 0);
  const Domain dom{Eigen::Vector2d(-5, 0), Eigen::Vector2d(1, 1)};
  const auto h = bo_run([](const HyperPoint&) { return 0.5; }, dom, BoOptions{3, 4, 2.576}, rng);
  CHECK(h.rows.size() == 7);
  CHECK(h.best_value == 0.5);
  CHECK(h.best_round == 1);
}

TEST_CASE("objective failures carry the offending point") {
  RngStream rng(98, 0);
  const Domain dom = Domain::unit(1);
  try {
    bo_run([](const HyperPoint&) -> double { throw std::runtime_error("boom"); }, dom, BoOptions{}, rng);
    FAIL("expected ObjectiveFailure");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kObjectiveFailure);
    CHECK(std::string(e.what()).find("theta") != std::string::npos);
    CHECK(std::string(e.what()).find("boom") != std::string::npos);
  }
  RngStream rng2(98, 1);
  CHECK_THROWS_AS(bo_run([](const HyperPoint&) { return std::nan(""); }, dom, BoOptions{}, rng2), Error);
}
