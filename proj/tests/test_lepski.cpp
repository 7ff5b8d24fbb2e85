#include "mulreg/error.hpp"
#include "mulreg/lepski.hpp"
#include "mulreg/rng.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

using namespace mulreg;

namespace {

IntegratorConfig coarse()
{
  IntegratorConfig c;
  c.nodes_per_axis = 16;
  return c;
}

} // namespace

TEST_CASE("bandwidth ladders")
{
  const BandwidthGrid g = bandwidth_grid(100, 2, 1);
  CHECK(g.h_max == doctest::Approx(0.2154).epsilon(1e-3));
  CHECK(g.h_min == doctest::Approx(0.0277).epsilon(1e-2));
  REQUIRE(g.last() == 2);
  CHECK(g.h[1] == doctest::Approx(0.1077).epsilon(1e-3));
  CHECK(g.h[2] == doctest::Approx(0.0539).epsilon(1e-3));

  const BandwidthGrid g2 = bandwidth_grid(1000, 2, 1);
  CHECK(g2.h_max == doctest::Approx(0.1));
  CHECK(g2.h_min == doctest::Approx(0.00363).epsilon(1e-2));
  CHECK(g2.last() == 4);
  for (std::size_t k = 1; k < g2.h.size(); ++k)
    CHECK(g2.h[k] < g2.h[k - 1]);
  CHECK(g2.h.back() >= g2.h_min);

  try {
    bandwidth_grid(3, 2, 1);
    FAIL("expected a degenerate grid");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::DegenerateGrid);
  }
}

TEST_CASE("thresholds")
{
  CHECK(theory_constant(3, 1.0, 1) == 559872.0);
  ThresholdParams p;
  p.c_thr = 2.0;
  CHECK(threshold(1, 100, 1, 0.1077, 0.005, 3, p) == doctest::Approx(62.9).epsilon(1e-3));

  // increasing in l along a halving ladder with a fixed eigenvalue
  const BandwidthGrid g = bandwidth_grid(1000, 2, 1);
  double prev = 0.0;
  for (int l = 0; l <= g.last(); ++l) {
    const double s = threshold(l, 1000, 1, g.h[static_cast<std::size_t>(l)], 0.005, 3, p);
    CHECK(s > prev);
    prev = s;
  }
  CHECK(std::isinf(threshold(1, 100, 1, 0.1, 0.0, 3, p)));

  ThresholdParams t;
  t.mode = ThresholdMode::Theory;
  CHECK(threshold(0, 100, 1, 0.2, 0.005, 3, t) == doctest::Approx(559872.0 / 0.005 / 20.0));
}

TEST_CASE("random parameter set")
{
  const auto idx = multi_indices(1, 1);
  const ParamSet s = random_param_set(2.0, 2.0, idx);
  CHECK(s.a_low == 1.0);
  CHECK(s.m_up == 8.0);
  const ParamSet s2 = random_param_set(1.5, 2.0, idx);
  CHECK(s2.a_low == 0.75);
  CHECK(s2.m_up == 8.0);
  try {
    random_param_set(-0.1, 1.0, idx);
    FAIL("expected invalid bounds");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::InvalidBounds);
  }
}

TEST_CASE("selection rule")
{
  const std::vector<double> same{1.0, 1.0, 1.0};
  const std::vector<double> zero{0.0, 0.0, 0.0};
  CHECK(select_index(same, zero, 1.0) == 0);
  const std::vector<double> distinct{1.0, 1.5, 2.0};
  CHECK(select_index(distinct, zero, 1.0) == 2);
  const std::vector<double> est{1.0, 1.01, 2.0};
  const std::vector<double> thr{0.0, 0.05, 0.05};
  CHECK(select_index(est, thr, 1.0) == 2);
  const std::vector<double> loose{0.0, 0.05, 2.0};
  CHECK(select_index(est, loose, 1.0) == 0);
}

TEST_CASE("trace replay and threshold scaling")
{
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 500; ++trial) {
    const int count = 2 + static_cast<int>(unit(gen) * 5);
    std::vector<ScaleEstimate> est(static_cast<std::size_t>(count));
    for (int k = 0; k < count; ++k) {
      est[static_cast<std::size_t>(k)].k = k;
      est[static_cast<std::size_t>(k)].f_hat = 1.0 + unit(gen);
      est[static_cast<std::size_t>(k)].s_n = 0.1 * unit(gen) * (k + 1);
    }
    const SelectionTrace t = assemble_trace(est, 1.0, 1.5, {});
    CHECK(trace_consistent(t));
    CHECK(t.comparisons.size() == static_cast<std::size_t>(count * (count - 1) / 2));

    // a tampered trace is caught
    SelectionTrace bad = t;
    bad.k_hat = (t.k_hat + 1) % count;
    CHECK_FALSE(trace_consistent(bad));

    for (double rho : {1.0, 1.5, 3.0, 10.0}) {
      auto scaled = est;
      for (auto& e : scaled)
        e.s_n *= rho;
      CHECK(assemble_trace(scaled, 1.0, 1.5, {}).k_hat <= t.k_hat);
    }
  }
}

TEST_CASE("adaptive estimate on f1")
{
  const auto grid = std::make_shared<const DesignGrid>(make_grid(1, 100));
  const Sample s = simulate(test_function("f1"), grid, 7);
  const double y = 0.5;
  const AdaptiveResult a = adaptive_estimate(s, std::span<const double>(&y, 1), 2, coarse(), {});
  const AdaptiveResult b = adaptive_estimate(s, std::span<const double>(&y, 1), 2, coarse(), {});
  CHECK(a.f_hat == b.f_hat);
  CHECK(a.trace.k_hat == b.trace.k_hat);
  CHECK(a.trace.comparisons.size() == b.trace.comparisons.size());
  CHECK(trace_consistent(a.trace));
  CHECK(a.trace.estimates.size() == 3);
  for (const auto& e : a.trace.estimates) {
    CHECK(e.lambda > 0.0);
    CHECK(e.window_count > 0);
  }
  // thresholds grow along the ladder
  CHECK(a.trace.estimates[1].s_n > a.trace.estimates[0].s_n);
  CHECK(a.trace.estimates[2].s_n > a.trace.estimates[1].s_n);
}

TEST_CASE("theory constants never leave the coarsest scale at desk sizes")
{
  ThresholdParams theory;
  theory.mode = ThresholdMode::Theory;
  for (std::size_t n : {100u, 1000u}) {
    const auto grid = std::make_shared<const DesignGrid>(make_grid(1, n));
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const Sample s = simulate(test_function("f1"), grid, seed);
      for (double y : {0.3, 0.5, 0.7}) {
        const auto r = adaptive_estimate(s, std::span<const double>(&y, 1), 2, coarse(), theory);
        CHECK(r.trace.k_hat == 0);
      }
    }
  }
}

TEST_CASE("adaptive estimate on a constant")
{
  const auto grid = std::make_shared<const DesignGrid>(make_grid(1, 400));
  const FunctionSpec f = test_function("constant(2)");
  const double y = 0.5;
  int inside = 0;
  for (std::uint64_t r = 0; r < 200; ++r) {
    const Sample s = simulate(f, grid, derive_seed(2024, r));
    const double v = adaptive_estimate(s, std::span<const double>(&y, 1), 2, coarse(), {}).f_hat;
    inside += v >= 1.7 && v <= 2.3;
  }
  CHECK(inside >= 180);
}

TEST_CASE("plug-in bounds on constants")
{
  // A-hat is the least-squares intercept: for constant(2), Var(2Y) = 4/3 and the
  // intercept entry of the inverse limit moment matrix is 9/4, so its sd is
  // sqrt(3 / N) with N window points; at n = 1e4 that is about 0.080 and only
  // ~79% of draws fall within 0.1 of the truth.
  // M-hat sums derivative-scaled coefficients whose noise grows like n^(1/3)
  // at h_max, so it drifts upward with n instead of settling at 2.
  const auto idx = multi_indices(1, 2);
  const double y = 0.5;
  const FunctionSpec f = test_function("constant(2)");
  std::vector<double> median_m;
  for (std::size_t n : {1000u, 10000u}) {
    const auto grid = std::make_shared<const DesignGrid>(make_grid(1, n));
    const double h_max = bandwidth_grid(n, 2, 1).h_max;
    const WindowData probe = window(simulate(f, grid, 0), std::span<const double>(&y, 1), h_max, idx);
    const double sd = std::sqrt(3.0 / static_cast<double>(probe.count()));
    const double p_close = std::erf(0.1 / sd / std::sqrt(2.0));
    std::vector<double> m_hat;
    int close = 0;
    double mean = 0.0;
    const int reps = 100;
    for (int r = 0; r < reps; ++r) {
      const Sample s = simulate(f, grid, derive_seed(77, static_cast<std::uint64_t>(r)));
      const PlugIn p = plug_in(s, std::span<const double>(&y, 1), h_max, idx);
      close += std::abs(p.bounds.a_hat - 2.0) < 0.1;
      mean += p.bounds.a_hat / reps;
      CHECK(p.bounds.m_hat >= p.bounds.a_hat);
      m_hat.push_back(p.bounds.m_hat);
    }
    const double binom_sd = std::sqrt(reps * p_close * (1.0 - p_close));
    CHECK(std::abs(close - reps * p_close) <= 4.0 * binom_sd);
    CHECK(std::abs(mean - 2.0) <= 4.0 * sd / std::sqrt(reps));
    std::nth_element(m_hat.begin(), m_hat.begin() + reps / 2, m_hat.end());
    median_m.push_back(m_hat[reps / 2]);
  }
  CHECK(median_m[1] > median_m[0]);
}
