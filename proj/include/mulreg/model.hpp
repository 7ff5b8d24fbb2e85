#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace mulreg {

//! Full tensor grid {1/m, 2/m, ..., 1}^d in lexicographic order, m^d = n.
class DesignGrid {
public:
  DesignGrid(int d, std::size_t n, std::size_t m, std::vector<double> coords);

  int dim() const { return d_; }
  std::size_t size() const { return n_; }
  std::size_t points_per_axis() const { return m_; }

  std::span<const double> point(std::size_t i) const
  {
    return {coords_.data() + i * static_cast<std::size_t>(d_), static_cast<std::size_t>(d_)};
  }
  const std::vector<double>& coords() const { return coords_; }

  friend bool operator==(const DesignGrid&, const DesignGrid&) = default;

private:
  int d_;
  std::size_t n_;
  std::size_t m_;
  std::vector<double> coords_;
};

//! Throws NonCubicSampleSize unless n = m^d with integer m >= 2.
DesignGrid make_grid(int d, std::size_t n);

using PointFunction = std::function<double(std::span<const double>)>;
//! Partial derivative of order p (a multi-index) at x.
using PartialFunction = std::function<double(std::span<const double> x, std::span<const int> p)>;

//! A regression function f on [0,1]^d plus the metadata used for reporting
//! and validation.
struct FunctionSpec {
  std::string id;
  PointFunction value;
  //! Empty when derivatives are unknown; derivative_bound then throws.
  PartialFunction partial;
  double beta_nominal = 0.0;

  double operator()(std::span<const double> x) const { return value(x); }

  //! A(f): infimum of f over the cube V_h(y), by dense evaluation.
  double lower_envelope(std::span<const double> y, double h) const;
  //! M(f): sum over |p| <= b of |d^p f(y)|. Non-existing derivatives count as 0.
  double derivative_bound(std::span<const double> y, int b) const;
};

//! Shipped identifiers: f1, f2, f3, f4, constant(<c>). Functions of one
//! variable are applied to the mean of the coordinates when d > 1.
FunctionSpec test_function(const std::string& id);

FunctionSpec custom_function(std::string id, PointFunction value, PartialFunction partial = {},
                             double beta_nominal = 0.0);

//! Uniform multiplicative noise, or U_i = 1 for degenerate debugging runs.
enum class NoiseMode { Uniform, None };

struct Sample {
  std::shared_ptr<const DesignGrid> grid;
  std::vector<double> y_values;
  std::uint64_t seed = 0;
  std::string function_id;

  std::size_t size() const { return y_values.size(); }
  std::span<const double> x(std::size_t i) const { return grid->point(i); }
};

//! Y_i = f(X_i) * U_i with U_i drawn from the Philox stream keyed by seed.
Sample simulate(const FunctionSpec& f, std::shared_ptr<const DesignGrid> grid, std::uint64_t seed,
                NoiseMode noise = NoiseMode::Uniform);

} // namespace mulreg
