#include "mulreg/error.hpp"
#include "mulreg/linalg.hpp"
#include "mulreg/local_poly.hpp"

#include <doctest.h>

#include <Eigen/Eigenvalues>

#include <cmath>
#include <set>

using namespace mulreg;

namespace {

ErrorKind kind_of(auto&& fn)
{
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an Error");
  return ErrorKind::InvalidArgument;
}

Sample sample_with(std::size_t n, std::function<double(double)> y)
{
  auto grid = std::make_shared<const DesignGrid>(make_grid(1, n));
  Sample s;
  s.grid = grid;
  for (std::size_t i = 0; i < n; ++i)
    s.y_values.push_back(y(grid->point(i)[0]));
  return s;
}

std::vector<double> pt(double y)
{
  return {y};
}

} // namespace

TEST_CASE("multi-index sets")
{
  auto s = multi_indices(1, 2);
  REQUIRE(s->size() == 3);
  CHECK(s->index(0)[0] == 0);
  CHECK(s->index(1)[0] == 1);
  CHECK(s->index(2)[0] == 2);
  CHECK(multi_indices(2, 2)->size() == 6);
  CHECK(multi_indices(1, 0)->size() == 1);

  // brute-force count of exponents with |p| <= b
  for (int d = 1; d <= 5; ++d) {
    for (int b = 0; b <= 5; ++b) {
      std::size_t count = 0;
      std::vector<int> p(static_cast<std::size_t>(d), 0);
      for (;;) {
        int deg = 0;
        for (int v : p)
          deg += v;
        count += deg <= b;
        std::size_t j = 0;
        while (j < p.size() && ++p[j] > b)
          p[j++] = 0;
        if (j == p.size())
          break;
      }
      const auto set = multi_indices(d, b);
      CHECK(set->size() == count);
      CHECK(coefficient_count(d, b) == count);
      std::set<std::vector<int>> uniq;
      for (std::size_t k = 0; k < set->size(); ++k) {
        auto idx = set->index(k);
        uniq.insert(std::vector<int>(idx.begin(), idx.end()));
        if (k > 0)
          CHECK(set->total_degree(k) >= set->total_degree(k - 1));
      }
      CHECK(uniq.size() == count);
      CHECK(set->total_degree(0) == 0);
    }
  }
}

TEST_CASE("window extraction")
{
  const Sample s = sample_with(100, [](double) { return 1.0; });
  const auto idx = multi_indices(1, 2);
  // closed cube [0.45, 0.55] holds 0.45, ..., 0.55
  const WindowData w = window(s, pt(0.5), 0.1, idx);
  CHECK(w.count() == 11);
  CHECK(w.point(0)[0] == doctest::Approx(0.45));
  CHECK(w.point(10)[0] == doctest::Approx(0.55));
  for (std::size_t i = 0; i < w.count(); ++i)
    CHECK(std::abs(w.point(i)[0] - 0.5) <= 0.05 + 1e-12);
  CHECK(kind_of([&] { window(s, pt(0.05), 0.2, idx); }) == ErrorKind::WindowOutOfDomain);
  CHECK(kind_of([&] { window(s, pt(0.505), 0.005, idx); }) == ErrorKind::EmptyWindow);
}

TEST_CASE("moment matrix")
{
  const Sample s = sample_with(1000, [](double) { return 1.0; });
  const auto idx1 = multi_indices(1, 1);
  const MomentMatrix m = design_matrix(window(s, pt(0.5), 0.5, idx1), 1000);
  CHECK(std::abs(m.entries(0, 0) - 1.0) < 0.01);
  CHECK(std::abs(m.entries(0, 1)) < 0.01);
  CHECK(std::abs(m.entries(1, 1) - 1.0 / 12.0) < 0.01);

  // analytic limit for b = 2 and its smallest eigenvalue
  const auto idx2 = multi_indices(1, 2);
  const Eigen::MatrixXd lim = limit_moment_matrix(*idx2);
  Eigen::MatrixXd expect(3, 3);
  expect << 1, 0, 1.0 / 12, 0, 1.0 / 12, 0, 1.0 / 12, 0, 1.0 / 80;
  CHECK((lim - expect).cwiseAbs().maxCoeff() < 1e-15);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> oracle(expect);
  const double lambda0 = oracle.eigenvalues().minCoeff();
  CHECK(lambda0 == doctest::Approx(0.005516).epsilon(1e-3));
  CHECK(smallest_eigenvalue(expect) == doctest::Approx(lambda0).epsilon(1e-12));

  // single point window with b = 0
  const auto idx0 = multi_indices(1, 0);
  const WindowData one = window(s, pt(0.5), 0.0005, idx0);
  REQUIRE(one.count() == 1);
  const MomentMatrix m1 = design_matrix(one, 1000);
  CHECK(m1.lambda_min == doctest::Approx(1.0 / (1000 * 0.0005)));
}

TEST_CASE("jacobi eigenvalues agree with a reference solver")
{
  Eigen::MatrixXd a(4, 4);
  a << 4, 1, 0.5, 0, 1, 3, 0.2, 0.1, 0.5, 0.2, 2, 0.3, 0, 0.1, 0.3, 1;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> oracle(a);
  const Eigen::VectorXd ours = jacobi_eigenvalues(a);
  for (int i = 0; i < 4; ++i)
    CHECK(ours(i) == doctest::Approx(oracle.eigenvalues()(i)).epsilon(1e-12));
}

TEST_CASE("moment matrix converges to its limit")
{
  const auto idx = multi_indices(1, 2);
  const Eigen::MatrixXd lim = limit_moment_matrix(*idx);
  double prev = 1e300;
  for (std::size_t n : {100u, 1000u, 10000u}) {
    const Sample s = sample_with(n, [](double) { return 1.0; });
    double worst = 0.0;
    for (double h = 0.05; h <= 0.5 + 1e-12; h += 0.05) {
      const MomentMatrix m = design_matrix(window(s, pt(0.5), h, idx), n);
      worst = std::max(worst, (m.entries - lim).cwiseAbs().maxCoeff());
      CHECK(m.lambda_min >= 0.0);
      if (static_cast<double>(n) * h >= 1000.0)
        CHECK(std::abs(m.lambda_min - 0.005516) <= 0.1 * 0.005516);
    }
    CHECK(worst < prev);
    prev = worst;
  }
}

TEST_CASE("local least squares")
{
  const auto idx1 = multi_indices(1, 1);
  const Sample c = sample_with(100, [](double) { return 1.25; });
  const LocalFit fit = local_lse(window(c, pt(0.5), 0.2, idx1));
  CHECK(fit.theta[0] == doctest::Approx(2.5));
  CHECK(std::abs(fit.theta[1]) < 1e-12);
  CHECK(fit.delta[0] == doctest::Approx(2.5));
  CHECK(std::abs(fit.delta[1]) < 1e-10);

  // exact quadratic data is reproduced: 2Y = 1 + 2x - 3x^2
  const auto idx2 = multi_indices(1, 2);
  const Sample q = sample_with(200, [](double x) { return 0.5 * (1.0 + 2.0 * x - 3.0 * x * x); });
  const double y = 0.4;
  const double h = 0.3;
  const LocalFit qf = local_lse(window(q, pt(y), h, idx2));
  // in z = (x - y)/h: 1 + 2(y + hz) - 3(y + hz)^2
  CHECK(qf.theta[0] == doctest::Approx(1.0 + 2.0 * y - 3.0 * y * y).epsilon(1e-9));
  CHECK(qf.theta[1] == doctest::Approx((2.0 - 6.0 * y) * h).epsilon(1e-9));
  CHECK(qf.theta[2] == doctest::Approx(-3.0 * h * h).epsilon(1e-9));
  // delta_p = p! h^-p theta_p recovers the derivatives
  CHECK(qf.delta[1] == doctest::Approx(2.0 - 6.0 * y).epsilon(1e-9));
  CHECK(qf.delta[2] == doctest::Approx(-6.0).epsilon(1e-9));

  const Sample s = sample_with(1000, [](double) { return 1.0; });
  CHECK(kind_of([&] { local_lse(window(s, pt(0.5), 0.0005, idx2)); }) == ErrorKind::SingularDesign);
}

TEST_CASE("plug-in bounds")
{
  const auto idx1 = multi_indices(1, 1);
  const auto idx2 = multi_indices(1, 2);
  PlugInBounds b = plug_in_bounds(PolyCoeffs{idx1, {2.0, 0.0}});
  CHECK(b.a_hat == 2.0);
  CHECK(b.m_hat == 2.0);
  b = plug_in_bounds(PolyCoeffs{idx2, {1.5, -0.3, 0.2}});
  CHECK(b.a_hat == 1.5);
  CHECK(b.m_hat == doctest::Approx(2.0));
  CHECK(kind_of([&] { plug_in_bounds(PolyCoeffs{idx1, {-0.1, 0.5}}); }) == ErrorKind::NonPositiveAhat);
}

TEST_CASE("validity interval is ordered for moderate n")
{
  const auto [lo, hi] = validity_interval(1000, 2, 1);
  CHECK(lo > 0.0);
  CHECK(lo < hi);
  CHECK(hi < 1.0);
}
