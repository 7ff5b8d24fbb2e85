#include "mulreg/error.hpp"
#include "mulreg/model.hpp"

#include <doctest.h>

#include <cmath>

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

double at(const FunctionSpec& f, double x)
{
  return f(std::span<const double>(&x, 1));
}

} // namespace

TEST_CASE("make_grid enumerates the tensor grid")
{
  const DesignGrid g = make_grid(1, 4);
  REQUIRE(g.size() == 4);
  CHECK(g.point(0)[0] == 0.25);
  CHECK(g.point(1)[0] == 0.5);
  CHECK(g.point(2)[0] == 0.75);
  CHECK(g.point(3)[0] == 1.0);

  const DesignGrid g2 = make_grid(2, 4);
  CHECK(g2.points_per_axis() == 2);
  CHECK(g2.point(0)[0] == 0.5);
  CHECK(g2.point(0)[1] == 0.5);
  // lexicographic: last coordinate fastest
  CHECK(g2.point(1)[0] == 0.5);
  CHECK(g2.point(1)[1] == 1.0);

  CHECK(kind_of([] { make_grid(2, 5); }) == ErrorKind::NonCubicSampleSize);
  CHECK(kind_of([] { make_grid(1, 1); }) == ErrorKind::NonCubicSampleSize);
  CHECK(make_grid(2, 9) == make_grid(2, 9));
}

TEST_CASE("test functions")
{
  CHECK(at(test_function("f1"), 0.5) == doctest::Approx(1.0));
  CHECK(at(test_function("f2"), 0.5) == 1.0);
  CHECK(at(test_function("f2"), 1.0 / 3.0) == 2.0);
  CHECK(at(test_function("f2"), 0.9) == 3.0);
  CHECK(at(test_function("f3"), 0.0) == doctest::Approx(3.0));
  CHECK(at(test_function("constant(2.5)"), 0.3) == 2.5);
  CHECK(kind_of([] { test_function("f9"); }) == ErrorKind::UnknownFunctionId);
  CHECK(kind_of([] { test_function("constant(x)"); }) == ErrorKind::UnknownFunctionId);

  const FunctionSpec f4 = test_function("f4");
  // linear on [3/8, 5/8] with value 2 at 1/2, level 2 at both ends
  for (double x : {0.375, 0.4, 0.5, 0.6, 0.625})
    CHECK(at(f4, x) == doctest::Approx(2.0 + 1.5 * (x - 0.5)));
  CHECK(at(f4, 0.0) == doctest::Approx(2.0));
  CHECK(at(f4, 1.0) == doctest::Approx(2.0));
  // continuity at the joins
  CHECK(std::abs(at(f4, 0.375 - 1e-9) - at(f4, 0.375 + 1e-9)) < 1e-6);
  CHECK(std::abs(at(f4, 0.625 - 1e-9) - at(f4, 0.625 + 1e-9)) < 1e-6);
  for (int i = 0; i <= 100; ++i)
    CHECK(at(f4, i / 100.0) > 0.0);
}

TEST_CASE("function metadata")
{
  const FunctionSpec f1 = test_function("f1");
  const double y = 0.5;
  // f1 has its minimum 1 at 1/2
  CHECK(f1.lower_envelope(std::span<const double>(&y, 1), 0.2) == doctest::Approx(1.0));
  // |f| + |f'| + |f''| at 1/2: 1 + 0 + 4 pi^2
  CHECK(f1.derivative_bound(std::span<const double>(&y, 1), 2) == doctest::Approx(1.0 + 4.0 * M_PI * M_PI));
}

TEST_CASE("simulate")
{
  const auto grid = std::make_shared<const DesignGrid>(make_grid(1, 100));
  const FunctionSpec f1 = test_function("f1");
  const Sample a = simulate(f1, grid, 11);
  const Sample b = simulate(f1, grid, 11);
  CHECK(a.y_values == b.y_values);
  CHECK(simulate(f1, grid, 12).y_values != a.y_values);

  const Sample s2 = simulate(test_function("f2"), grid, 3);
  for (std::size_t i = 0; i < s2.size(); ++i) {
    CHECK(s2.y_values[i] >= 0.0);
    CHECK(s2.y_values[i] <= at(test_function("f2"), s2.x(i)[0]));
    CHECK(s2.y_values[i] <= 3.0);
  }

  const Sample z = simulate(f1, grid, 3, NoiseMode::None);
  for (std::size_t i = 0; i < z.size(); ++i)
    CHECK(z.y_values[i] == f1(z.x(i)));
}

TEST_CASE("mean of Y/f is one half")
{
  const auto grid = std::make_shared<const DesignGrid>(make_grid(1, 10000));
  const FunctionSpec f = test_function("f3");
  const Sample s = simulate(f, grid, 2024);
  double mean = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i)
    mean += s.y_values[i] / f(s.x(i));
  mean /= static_cast<double>(s.size());
  const double band = 3.0 / std::sqrt(12.0 * 1e4);
  CHECK(mean >= 0.5 - band);
  CHECK(mean <= 0.5 + band);
}
