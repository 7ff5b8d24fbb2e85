#include "mulreg/error.hpp"
#include "mulreg/experiments.hpp"

#include <doctest.h>

#include <cmath>

using namespace mulreg;

namespace {

EstimatorSpec fixed_spec(double h)
{
  EstimatorSpec s;
  s.kind = EstimatorKind::Fixed;
  s.h = h;
  s.known_bounds = true;
  s.a_low = 1.0;
  s.m_up = 3.0;
  s.integrator.nodes_per_axis = 16;
  return s;
}

RunOptions opts(std::size_t reps, Backend backend = Backend::OpenMP)
{
  RunOptions o;
  o.reps = reps;
  o.master_seed = 11;
  o.backend = backend;
  return o;
}

} // namespace

TEST_CASE("serial and parallel replications agree bit for bit")
{
  const FunctionSpec f = test_function("f1");
  const std::vector<double> y{0.5};
  EstimatorSpec adaptive;
  adaptive.integrator.nodes_per_axis = 16;
  const RiskReport a = mc_risk(adaptive, f, y, 100, 1, opts(24, Backend::Serial));
  RunOptions par = opts(24, Backend::OpenMP);
  par.workers = 3;
  const RiskReport b = mc_risk(adaptive, f, y, 100, 1, par);
  CHECK(a.risk == b.risk);
  CHECK(a.se == b.se);
  CHECK(a.mean_bandwidth == b.mean_bandwidth);
  CHECK(a.bandwidth_histogram == b.bandwidth_histogram);

  const RiskReport c = mc_risk(adaptive, f, y, 100, 1, par);
  CHECK(c.risk == b.risk);
  CHECK(a.risk >= 0.0);
  CHECK(a.failures == 0);
}

TEST_CASE("replicate helpers")
{
  const auto sq = [](std::size_t i) { return static_cast<double>(i * i); };
  CHECK(replicate_serial<double>(50, sq) == replicate_parallel<double>(50, 4, sq));
  CHECK_THROWS_AS(replicate_parallel<double>(10, 2,
                                             [](std::size_t i) -> double {
                                               if (i == 7)
                                                 throw Error(ErrorKind::SingularDesign, "boom");
                                               return 0.0;
                                             }),
                  Error);
  CHECK(parse_backend("serial") == Backend::Serial);
  CHECK(parse_backend("openmp") == Backend::OpenMP);
  CHECK(resolve_workers(5) == 5);
}

TEST_CASE("noise-free data are recovered")
{
  // with U = 1 every observation sits on the frontier; the posterior then piles up
  // just above it and the error shrinks like 1/N
  RunOptions o = opts(4);
  o.noise = NoiseMode::None;
  const std::vector<double> y{0.5};
  const FunctionSpec f = test_function("constant(2)");
  const double r400 = mc_risk(fixed_spec(0.2), f, y, 400, 1, o).risk;
  const double r1600 = mc_risk(fixed_spec(0.2), f, y, 1600, 1, o).risk;
  CHECK(r400 < 0.05);
  CHECK(r1600 < 0.5 * r400);
}

TEST_CASE("mean and standard error")
{
  const std::vector<double> v{1.0, 2.0, 3.0, NAN};
  const MeanSe m = mean_se(v);
  CHECK(m.count == 3);
  CHECK(m.mean == doctest::Approx(2.0));
  CHECK(m.se == doctest::Approx(1.0 / std::sqrt(3.0)));
}

TEST_CASE("argmin prefers the larger bandwidth on ties")
{
  const std::vector<double> risks{0.3, 0.1, 0.1, 0.2};
  const std::vector<double> h{0.05, 0.1, 0.2, 0.4};
  CHECK(argmin_prefer_larger(risks, h) == 2);
  const std::vector<double> bad{NAN, NAN};
  CHECK_THROWS_AS(argmin_prefer_larger(bad, std::vector<double>{0.1, 0.2}), Error);
}

TEST_CASE("evaluation points and candidate ladders")
{
  const BandwidthGrid g = bandwidth_grid(100, 2, 1);
  const auto pts = evaluation_points(100, g.h_max);
  CHECK(pts.size() == 78);
  CHECK(pts.front() == doctest::Approx(0.115));
  CHECK(pts.back() == doctest::Approx(0.885));
  CHECK(evaluation_points(100, bandwidth_grid(1000, 2, 1).h_max).size() == 90);

  const auto cands = ladder_with_midpoints(g);
  REQUIRE(cands.size() == 5);
  CHECK(cands[0] == g.h[0]);
  CHECK(cands[2] == g.h[1]);
  CHECK(cands[4] == g.h[2]);
  CHECK(cands[1] == doctest::Approx(std::sqrt(g.h[0] * g.h[1])));
}

TEST_CASE("line fit")
{
  const std::vector<double> x{0.0, 1.0, 2.0, 3.0};
  const std::vector<double> y{1.0, 3.0, 5.0, 7.0};
  const LineFit f = fit_line(x, y);
  CHECK(f.slope == doctest::Approx(2.0));
  CHECK(f.intercept == doctest::Approx(1.0));
  CHECK(f.r2 == doctest::Approx(1.0));
}

TEST_CASE("oracle on a constant picks the widest window")
{
  const std::vector<double> y{0.5};
  const std::vector<double> cands{0.05, 0.1, 0.2, 0.4};
  const OracleResult r = oracle_bandwidth(fixed_spec(0.0), test_function("constant(2)"), y, 400, 1, cands, opts(100));
  CHECK(r.h_tilde == 0.4);
  CHECK(r.risks.front() > r.risks.back());
  CHECK(r.failures == 0);

  const std::vector<double> wide{0.99, 1.2};
  CHECK_THROWS_AS(oracle_bandwidth(fixed_spec(0.0), test_function("f1"), y, 100, 1, wide, opts(4)), Error);
}

TEST_CASE("tail probabilities")
{
  TailConfig cfg;
  cfg.spec = fixed_spec(0.25);
  cfg.run = opts(300);
  const TailCurve c = tail_decay_check(cfg);
  REQUIRE(c.prob.size() == c.eps.size());
  CHECK(c.prob.front() == 1.0);
  for (std::size_t i = 1; i < c.prob.size(); ++i)
    CHECK(c.prob[i] <= c.prob[i - 1]);
  CHECK(c.fit.slope < 0.0);
}

TEST_CASE("rate candidates respect the ladder floor")
{
  for (std::size_t n : {100u, 400u, 1600u}) {
    const auto c = rate_candidates(n, 2, 0.3);
    REQUIRE(!c.empty());
    for (std::size_t i = 1; i < c.size(); ++i)
      CHECK(c[i] < c[i - 1]);
    CHECK(c.back() >= 4.0 / static_cast<double>(n) - 1e-12);
    for (double h : c)
      CHECK(h <= 0.6);
  }
}
