#pragma once

#include "mulreg/model.hpp"

#include <Eigen/Dense>

#include <memory>
#include <span>
#include <utility>
#include <vector>

namespace mulreg {

//! Exponents p in N^d with |p| <= b. Graded by |p|; within a degree the
//! exponent tuples are in descending lexicographic order, so the first index
//! is (0,...,0) and for d=1 the order is 1, z, z^2, ...
class MultiIndexSet {
public:
  MultiIndexSet(int d, int b);

  int dim() const { return d_; }
  int degree() const { return b_; }
  std::size_t size() const { return degrees_.size(); }

  std::span<const int> index(std::size_t k) const
  {
    return {exponents_.data() + k * static_cast<std::size_t>(d_), static_cast<std::size_t>(d_)};
  }
  int total_degree(std::size_t k) const { return degrees_[k]; }
  //! p_1! ... p_d!
  double factorial(std::size_t k) const { return factorials_[k]; }

  //! K(z) = (z^p : p in the set), written into out (length size()).
  void basis(std::span<const double> z, std::span<double> out) const;

private:
  int d_;
  int b_;
  std::vector<int> exponents_;
  std::vector<int> degrees_;
  std::vector<double> factorials_;
};

using IndexSetPtr = std::shared_ptr<const MultiIndexSet>;

IndexSetPtr multi_indices(int d, int b);

//! D_b = sum_{m=0}^{b} C(m+d-1, d-1).
std::size_t coefficient_count(int d, int b);

//! Coefficients of the local polynomial f_t(x) = sum_p t_p ((x - y)/h)^p.
struct PolyCoeffs {
  IndexSetPtr idx;
  std::vector<double> values;

  std::size_t size() const { return values.size(); }
  double operator[](std::size_t k) const { return values[k]; }
  double l1_norm() const;
  //! f_t(x) for x inside V_h(y); the indicator is the caller's concern.
  double evaluate(std::span<const double> x, std::span<const double> y, double h) const;
};

//! Observations of one sample falling in the closed cube V_h(y).
struct WindowData {
  std::vector<double> y;
  double h = 0.0;
  std::size_t sample_size = 0;
  IndexSetPtr idx;
  std::vector<std::size_t> members;  // indices into the sample
  std::vector<double> x;             // N x d, row-major
  std::vector<double> obs;           // Y_i
  std::vector<double> basis;         // N x D_b, rows K((X_i - y)/h)

  int dim() const { return static_cast<int>(y.size()); }
  std::size_t count() const { return obs.size(); }
  std::size_t coeffs() const { return idx->size(); }
  std::span<const double> basis_row(std::size_t i) const
  {
    return {basis.data() + i * coeffs(), coeffs()};
  }
  std::span<const double> point(std::size_t i) const
  {
    return {x.data() + i * y.size(), y.size()};
  }
  double max_obs() const;
};

//! Throws WindowOutOfDomain when V_h(y) leaves [0,1]^d and EmptyWindow when it
//! contains no design point.
WindowData window(const Sample& sample, std::span<const double> y, double h, IndexSetPtr idx);

//! True when V_h(y) lies in [0,1]^d (up to 1e-12).
bool window_in_domain(std::span<const double> y, double h);

//! (1/(n h^d)) sum_i K^T K over the window and its smallest eigenvalue.
struct MomentMatrix {
  Eigen::MatrixXd entries;
  double lambda_min = 0.0;
};

MomentMatrix design_matrix(const WindowData& win, std::size_t n);

//! Limit of the moment matrix as n h^d grows: entries prod_j of the integral
//! of x^(p_j + q_j) over [-1/2, 1/2].
Eigen::MatrixXd limit_moment_matrix(const MultiIndexSet& idx);

inline constexpr double kSingularTolerance = 1e-12;

//! Least-squares fit of 2 Y_i on the window basis (theta) and the derivative
//! scale delta_p = p! h^-|p| theta_p.
struct LocalFit {
  PolyCoeffs theta;
  PolyCoeffs delta;
  double lambda_min = 0.0;
};

LocalFit local_lse(const WindowData& win);

struct PlugInBounds {
  double a_hat = 0.0;
  double m_hat = 0.0;
};

//! A-hat = delta_0, M-hat = ||delta||_1. Throws NonPositiveAhat if A-hat <= 0.
PlugInBounds plug_in_bounds(const PolyCoeffs& delta);

//! Bandwidth range on which the exponential deviation bounds hold; outside of
//! it estimation still runs but callers may want to warn.
std::pair<double, double> validity_interval(std::size_t n, int b, int d);

} // namespace mulreg
