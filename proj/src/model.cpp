#include "mulreg/model.hpp"

#include "mulreg/error.hpp"
#include "mulreg/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace mulreg {

DesignGrid::DesignGrid(int d, std::size_t n, std::size_t m, std::vector<double> coords)
  : d_(d), n_(n), m_(m), coords_(std::move(coords))
{}

DesignGrid make_grid(int d, std::size_t n)
{
  if (d < 1)
    throw Error(ErrorKind::InvalidArgument, "dimension must be positive");
  const auto root = static_cast<std::size_t>(std::llround(std::pow(static_cast<double>(n), 1.0 / d)));
  std::size_t m = 0;
  for (std::size_t cand = (root > 0 ? root - 1 : 0); cand <= root + 1; ++cand) {
    std::size_t power = 1;
    for (int j = 0; j < d && power <= n; ++j)
      power *= cand;
    if (power == n) {
      m = cand;
      break;
    }
  }
  if (m < 2)
    throw Error(ErrorKind::NonCubicSampleSize,
                "n=" + std::to_string(n) + " is not m^" + std::to_string(d) + " for an integer m >= 2");

  std::vector<double> coords(n * static_cast<std::size_t>(d));
  std::vector<std::size_t> digit(static_cast<std::size_t>(d), 0);
  for (std::size_t i = 0; i < n; ++i) {
    for (int j = 0; j < d; ++j)
      coords[i * d + j] = static_cast<double>(digit[j] + 1) / static_cast<double>(m);
    // odometer with the last coordinate fastest -> lexicographic order
    for (int j = d - 1; j >= 0; --j) {
      if (++digit[j] < m)
        break;
      digit[j] = 0;
    }
  }
  return DesignGrid(d, n, m, std::move(coords));
}

namespace {

using Profile = std::function<double(double x, int order)>;

double mean_of(std::span<const double> x)
{
  double s = 0.0;
  for (double v : x)
    s += v;
  return s / static_cast<double>(x.size());
}

//! Lifts g: [0,1] -> R to f(x) = g(mean(x)); d^p f = g^(|p|)(mean) / d^|p|.
FunctionSpec from_profile(std::string id, Profile g, double beta)
{
  FunctionSpec spec;
  spec.id = std::move(id);
  spec.beta_nominal = beta;
  spec.value = [g](std::span<const double> x) { return g(mean_of(x), 0); };
  spec.partial = [g](std::span<const double> x, std::span<const int> p) {
    int order = 0;
    for (int v : p)
      order += v;
    const double scale = std::pow(static_cast<double>(x.size()), -order);
    return g(mean_of(x), order) * scale;
  };
  return spec;
}

double cosine_derivative(double freq, double x, int order)
{
  // d^k/dx^k cos(w x) = w^k cos(w x + k pi/2)
  return std::pow(freq, order) * std::cos(freq * x + order * std::numbers::pi / 2.0);
}

double sine_derivative(double freq, double x, int order)
{
  return std::pow(freq, order) * std::sin(freq * x + order * std::numbers::pi / 2.0);
}

//! k-th derivative of the cubic Hermite interpolant on [x0, x1].
double hermite(double x, double x0, double x1, double p0, double m0, double p1, double m1, int order)
{
  const double len = x1 - x0;
  const double t = (x - x0) / len;
  // p(t) = c0 + c1 t + c2 t^2 + c3 t^3
  const double c0 = p0;
  const double c1 = len * m0;
  const double c2 = -3.0 * p0 - 2.0 * len * m0 + 3.0 * p1 - len * m1;
  const double c3 = 2.0 * p0 + len * m0 - 2.0 * p1 + len * m1;
  switch (order) {
  case 0: return c0 + t * (c1 + t * (c2 + t * c3));
  case 1: return (c1 + t * (2.0 * c2 + 3.0 * t * c3)) / len;
  case 2: return (2.0 * c2 + 6.0 * t * c3) / (len * len);
  case 3: return 6.0 * c3 / (len * len * len);
  default: return 0.0;
  }
}

constexpr double kF4Slope = 1.5;
constexpr double kF4Lo = 3.0 / 8.0;
constexpr double kF4Hi = 5.0 / 8.0;

double f4_profile(double x, int order)
{
  const double at_lo = 2.0 + kF4Slope * (kF4Lo - 0.5);
  const double at_hi = 2.0 + kF4Slope * (kF4Hi - 0.5);
  if (x < kF4Lo)
    return hermite(x, 0.0, kF4Lo, 2.0, 0.0, at_lo, kF4Slope, order);
  if (x > kF4Hi)
    return hermite(x, kF4Hi, 1.0, at_hi, kF4Slope, 2.0, 0.0, order);
  switch (order) {
  case 0: return 2.0 + kF4Slope * (x - 0.5);
  case 1: return kF4Slope;
  default: return 0.0;
  }
}

} // namespace

double FunctionSpec::lower_envelope(std::span<const double> y, double h) const
{
  const std::size_t d = y.size();
  const auto per_axis = static_cast<std::size_t>(
    std::max(3.0, std::floor(std::pow(4.0e4, 1.0 / static_cast<double>(d)))));
  std::vector<std::size_t> digit(d, 0);
  std::vector<double> x(d);
  double lowest = std::numeric_limits<double>::infinity();
  for (;;) {
    for (std::size_t j = 0; j < d; ++j)
      x[j] = y[j] - h / 2.0 + h * static_cast<double>(digit[j]) / static_cast<double>(per_axis - 1);
    lowest = std::min(lowest, value(x));
    std::size_t j = 0;
    while (j < d && ++digit[j] == per_axis)
      digit[j++] = 0;
    if (j == d)
      break;
  }
  return lowest;
}

double FunctionSpec::derivative_bound(std::span<const double> y, int b) const
{
  if (!partial)
    throw Error(ErrorKind::InvalidArgument, "function '" + id + "' has no declared derivatives");
  const std::size_t d = y.size();
  double total = 0.0;
  // enumerate all p with |p| <= b
  std::vector<int> p(d, 0);
  for (;;) {
    int order = 0;
    for (int v : p)
      order += v;
    if (order <= b) {
      const double v = partial(y, p);
      if (std::isfinite(v))
        total += std::abs(v);
    }
    std::size_t j = 0;
    while (j < d && ++p[j] > b)
      p[j++] = 0;
    if (j == d)
      break;
  }
  return total;
}

FunctionSpec test_function(const std::string& id)
{
  constexpr double two_pi = 2.0 * std::numbers::pi;
  if (id == "f1") {
    return from_profile(id, [](double x, int k) {
      return cosine_derivative(two_pi, x, k) + (k == 0 ? 2.0 : 0.0);
    }, 2.0);
  }
  if (id == "f2") {
    return from_profile(id, [](double x, int k) {
      if (k > 0)
        return 0.0;
      if (x <= 1.0 / 3.0)
        return 2.0;
      if (x <= 2.0 / 3.0)
        return 1.0;
      return 3.0;
    }, 0.0);
  }
  if (id == "f3") {
    return from_profile(id, [](double x, int k) {
      return cosine_derivative(two_pi, x, k) + 0.3 * sine_derivative(19.0 * std::numbers::pi, x, k) +
             (k == 0 ? 2.0 : 0.0);
    }, 2.0);
  }
  if (id == "f4")
    return from_profile(id, f4_profile, 2.0);

  constexpr std::string_view prefix = "constant(";
  if (id.starts_with(prefix) && id.ends_with(")")) {
    const std::string body = id.substr(prefix.size(), id.size() - prefix.size() - 1);
    std::size_t used = 0;
    double c = 0.0;
    try {
      c = std::stod(body, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == body.size() && used > 0 && std::isfinite(c))
      return from_profile(id, [c](double, int k) { return k == 0 ? c : 0.0; }, 2.0);
  }
  throw Error(ErrorKind::UnknownFunctionId, "'" + id + "'");
}

FunctionSpec custom_function(std::string id, PointFunction value, PartialFunction partial, double beta_nominal)
{
  FunctionSpec spec;
  spec.id = std::move(id);
  spec.value = std::move(value);
  spec.partial = std::move(partial);
  spec.beta_nominal = beta_nominal;
  return spec;
}

Sample simulate(const FunctionSpec& f, std::shared_ptr<const DesignGrid> grid, std::uint64_t seed, NoiseMode noise)
{
  Sample s;
  s.seed = seed;
  s.function_id = f.id;
  s.y_values.resize(grid->size());
  UniformStream stream(seed);
  for (std::size_t i = 0; i < grid->size(); ++i) {
    const double fx = f(grid->point(i));
    if (!std::isfinite(fx))
      throw Error(ErrorKind::InvalidArgument, "function '" + f.id + "' is not finite on the design");
    const double u = noise == NoiseMode::Uniform ? stream.next_double() : 1.0;
    s.y_values[i] = fx * u;
  }
  s.grid = std::move(grid);
  return s;
}

} // namespace mulreg
