#include "mulreg/bayes.hpp"
#include "mulreg/error.hpp"
#include "mulreg/rng.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace mulreg;

TEST_CASE("pseudo-likelihood")
{
  const auto idx = multi_indices(1, 0);
  const auto w = oracle::make_window({0.45, 0.5, 0.55}, {0.5, 1.0, 0.2}, 0.5, 0.2, idx);
  const std::vector<double> c{2.0};
  CHECK(log_pseudo_likelihood(c, w) == doctest::Approx(-3.0 * std::log(2.0)));
  const std::vector<double> low{0.9};
  CHECK(std::isinf(log_pseudo_likelihood(low, w)));
  const auto z = oracle::make_window({0.5}, {0.0}, 0.5, 0.2, idx);
  const std::vector<double> zero{0.0};
  CHECK(std::isinf(log_pseudo_likelihood(zero, z)));
}

TEST_CASE("constant window matches the closed-form median")
{
  const auto idx = multi_indices(1, 0);
  // m = 1, M = 2, N = 3
  const auto w = oracle::make_window({0.45, 0.5, 0.55}, {0.5, 1.0, 0.2}, 0.5, 0.2, idx);
  const ParamSet set(0.5, 2.0, idx);
  CHECK(oracle::closed_form_median(1.0, 2.0, 3) == doctest::Approx(1.2649).epsilon(1e-4));
  const PosteriorEstimate est = bayes_estimate(w, set, {});
  CHECK(est.f_hat == doctest::Approx(oracle::closed_form_median(1.0, 2.0, 3)).epsilon(1e-3));
  CHECK(est.f_hat == est.theta_hat[0]);

  std::mt19937_64 gen(17);
  for (int i = 0; i < 20; ++i) {
    const auto fx = oracle::random_constant_fixture(gen);
    CHECK(bayes_estimate(fx.win, fx.set, {}).f_hat == doctest::Approx(fx.expected).epsilon(1e-3));
  }
}

TEST_CASE("inactive data gives the box center")
{
  // one tiny observation at the window center: no data constraint is active and
  // the law of the slope is symmetric about zero
  const auto idx = multi_indices(1, 1);
  const auto w = oracle::make_window({0.5}, {1e-6}, 0.5, 0.2, idx);
  const ParamSet set(1.0, 3.0, idx);
  const auto med = posterior_medians(w, set, {});
  CHECK(std::abs(med[1]) < 1e-6);
}

TEST_CASE("bayes estimate matches a brute-force grid minimization")
{
  std::mt19937_64 gen(23);
  for (int i = 0; i < 3; ++i) {
    const auto fx = oracle::random_linear_fixture(gen);
    const auto ref = oracle::brute_force_argmin(fx.win, fx.set, 200, 800);
    const auto est = bayes_estimate(fx.win, fx.set, {});
    CHECK(std::abs(est.theta_hat[0] - ref.t0) <= ref.cell0);
    CHECK(std::abs(est.theta_hat[1] - ref.t1) <= ref.cell1);
  }
}

TEST_CASE("estimates lie in the set")
{
  const auto grid = std::make_shared<const DesignGrid>(make_grid(1, 400));
  const FunctionSpec f = test_function("f1");
  for (int b = 0; b <= 2; ++b) {
    const auto idx = multi_indices(1, b);
    const ParamSet set(0.5, 4.0, idx);
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const Sample s = simulate(f, grid, seed);
      const double y = 0.5;
      const auto est = bayes_estimate(window(s, std::span<const double>(&y, 1), 0.15, idx), set, {});
      CHECK(membership(est.theta_hat, set, 1e-9));
      CHECK(est.f_hat >= set.a_low - 1e-9);
      CHECK(est.f_hat <= set.m_up + 1e-9);
    }
  }
}

TEST_CASE("scale equivariance")
{
  std::mt19937_64 gen(31);
  for (int i = 0; i < 5; ++i) {
    const auto fx = oracle::random_linear_fixture(gen);
    std::vector<double> ys = fx.win.obs;
    for (auto& v : ys)
      v *= 3.0;
    const auto scaled = oracle::make_window(fx.win.x, ys, 0.5, fx.win.h, fx.win.idx);
    const ParamSet set3(3.0 * fx.set.a_low, 3.0 * fx.set.m_up, fx.set.idx);
    const auto a = bayes_estimate(fx.win, fx.set, {});
    const auto b = bayes_estimate(scaled, set3, {});
    for (std::size_t p = 0; p < 2; ++p)
      CHECK(std::abs(b.theta_hat[p] - 3.0 * a.theta_hat[p]) <= 1e-12 * std::max(1.0, std::abs(b.theta_hat[p])));
  }
}

TEST_CASE("adding an observation never enlarges the support")
{
  std::mt19937_64 gen(37);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const auto idx = multi_indices(1, 1);
  const auto small = oracle::make_window({0.45, 0.5}, {1.2, 0.8}, 0.5, 0.2, idx);
  const auto large = oracle::make_window({0.45, 0.5, 0.55}, {1.2, 0.8, 1.7}, 0.5, 0.2, idx);
  int shrunk = 0;
  for (int i = 0; i < 2000; ++i) {
    const std::vector<double> u{1.0 + 2.0 * unit(gen), unit(gen) - 0.5};
    const bool in_large = std::isfinite(log_pseudo_likelihood(u, large));
    const bool in_small = std::isfinite(log_pseudo_likelihood(u, small));
    if (in_large)
      CHECK(in_small);
    shrunk += in_small && !in_large;
  }
  CHECK(shrunk > 0);
}

TEST_CASE("sample and grid integrators agree")
{
  std::mt19937_64 gen(41);
  const auto fx = oracle::random_linear_fixture(gen);
  IntegratorConfig g;
  g.method = IntegratorConfig::Method::Grid;
  IntegratorConfig s;
  s.method = IntegratorConfig::Method::Sample;
  s.seed = 3;
  const auto a = posterior_medians(fx.win, fx.set, g);
  const auto b = posterior_medians(fx.win, fx.set, s);
  CHECK(std::abs(a[0] - b[0]) < 0.02);
  CHECK(std::abs(a[1] - b[1]) < 0.02);
}

TEST_CASE("medians converge as the nodes double")
{
  std::mt19937_64 gen(43);
  const auto fx = oracle::random_linear_fixture(gen);
  const auto ref = oracle::marginal_medians(fx.win, fx.set, 4000);
  std::vector<std::vector<double>> meds;
  for (int nodes : {16, 32, 64, 128, 256}) {
    IntegratorConfig c;
    c.nodes_per_axis = nodes;
    meds.push_back(posterior_medians(fx.win, fx.set, c).values);
  }
  for (std::size_t p = 0; p < 2; ++p) {
    // the default resolution is within 5e-3, the finest within 5e-4
    CHECK(std::abs(meds[2][p] - ref[p]) < 5e-3);
    CHECK(std::abs(meds[4][p] - ref[p]) < 5e-4);
    CHECK(std::abs(meds[4][p] - meds[3][p]) < std::abs(meds[1][p] - meds[0][p]));
  }
}

TEST_CASE("minimax bandwidth")
{
  CHECK(minimax_bandwidth(1.0, 1.0, 1000, 1) == doctest::Approx(0.03162).epsilon(1e-3));
  CHECK(minimax_bandwidth(2.0, 1.0, 100, 1) == doctest::Approx(0.2154).epsilon(1e-3));
  CHECK(minimax_bandwidth(2.0, 1.0, 200, 1) < minimax_bandwidth(2.0, 1.0, 100, 1));
  CHECK(minimax_bandwidth(2.0, 2.0, 100, 1) < minimax_bandwidth(2.0, 1.0, 100, 1));
}

TEST_CASE("minimax estimate on a constant")
{
  const auto grid = std::make_shared<const DesignGrid>(make_grid(1, 400));
  const FunctionSpec f = test_function("constant(2)");
  const double y = 0.5;
  IntegratorConfig cfg;
  cfg.nodes_per_axis = 16;
  int close = 0;
  for (std::uint64_t r = 0; r < 200; ++r) {
    const Sample s = simulate(f, grid, derive_seed(99, r));
    const auto est = minimax_estimate(s, std::span<const double>(&y, 1), 2.0, 1.0, 1.0, 3.0, 2, cfg);
    close += std::abs(est.f_hat - 2.0) < 0.2;
  }
  CHECK(close >= 190);

  const Sample s = simulate(f, grid, 1);
  const double edge = 0.02;
  CHECK_THROWS_AS(minimax_estimate(s, std::span<const double>(&edge, 1), 2.0, 1.0, 1.0, 3.0, 2, cfg), Error);
}
