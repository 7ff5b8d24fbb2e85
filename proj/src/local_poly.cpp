#include "mulreg/local_poly.hpp"

#include "mulreg/error.hpp"
#include "mulreg/linalg.hpp"

#include <algorithm>
#include <cmath>

namespace mulreg {

namespace {

constexpr double kBoundaryTol = 1e-12;

double int_pow(double x, int p)
{
  double r = 1.0;
  for (int k = 0; k < p; ++k)
    r *= x;
  return r;
}

} // namespace

MultiIndexSet::MultiIndexSet(int d, int b)
  : d_(d), b_(b)
{
  if (d < 1 || b < 0)
    throw Error(ErrorKind::InvalidArgument, "multi-index set needs d >= 1 and b >= 0");
  for (int m = 0; m <= b; ++m) {
    // all p with |p| = m, descending lexicographic
    std::vector<int> p(static_cast<std::size_t>(d), 0);
    p[0] = m;
    for (;;) {
      exponents_.insert(exponents_.end(), p.begin(), p.end());
      degrees_.push_back(m);
      double fact = 1.0;
      for (int v : p)
        for (int k = 2; k <= v; ++k)
          fact *= k;
      factorials_.push_back(fact);
      // predecessor in lex order among compositions of m
      int j = d - 2;
      while (j >= 0 && p[j] == 0)
        --j;
      if (j < 0)
        break;
      --p[j];
      int rest = 0;
      for (int k = j + 1; k < d; ++k) {
        rest += p[k];
        p[k] = 0;
      }
      p[j + 1] = rest + 1;
    }
  }
}

void MultiIndexSet::basis(std::span<const double> z, std::span<double> out) const
{
  for (std::size_t k = 0; k < size(); ++k) {
    double v = 1.0;
    const auto p = index(k);
    for (int j = 0; j < d_; ++j)
      v *= int_pow(z[j], p[j]);
    out[k] = v;
  }
}

IndexSetPtr multi_indices(int d, int b)
{
  return std::make_shared<const MultiIndexSet>(d, b);
}

std::size_t coefficient_count(int d, int b)
{
  // C(m+d-1, d-1) accumulated exactly
  std::size_t total = 0;
  for (int m = 0; m <= b; ++m) {
    std::size_t c = 1;
    for (int k = 1; k <= d - 1; ++k)
      c = c * static_cast<std::size_t>(m + k) / static_cast<std::size_t>(k);
    total += c;
  }
  return total;
}

double PolyCoeffs::l1_norm() const
{
  double s = 0.0;
  for (double v : values)
    s += std::abs(v);
  return s;
}

double PolyCoeffs::evaluate(std::span<const double> x, std::span<const double> y, double h) const
{
  std::vector<double> z(y.size());
  for (std::size_t j = 0; j < y.size(); ++j)
    z[j] = (x[j] - y[j]) / h;
  std::vector<double> k(idx->size());
  idx->basis(z, k);
  double s = 0.0;
  for (std::size_t i = 0; i < k.size(); ++i)
    s += values[i] * k[i];
  return s;
}

double WindowData::max_obs() const
{
  return obs.empty() ? 0.0 : *std::max_element(obs.begin(), obs.end());
}

bool window_in_domain(std::span<const double> y, double h)
{
  if (!(h > 0.0))
    return false;
  for (double c : y)
    if (c - h / 2.0 < -kBoundaryTol || c + h / 2.0 > 1.0 + kBoundaryTol)
      return false;
  return true;
}

WindowData window(const Sample& sample, std::span<const double> y, double h, IndexSetPtr idx)
{
  const int d = sample.grid->dim();
  if (static_cast<int>(y.size()) != d || idx->dim() != d)
    throw Error(ErrorKind::InvalidArgument, "window center and index set must match the sample dimension");
  if (!window_in_domain(y, h))
    throw Error(ErrorKind::WindowOutOfDomain, "cube of side h=" + std::to_string(h) + " around the point leaves [0,1]^d");

  WindowData win;
  win.y.assign(y.begin(), y.end());
  win.h = h;
  win.sample_size = sample.size();
  win.idx = std::move(idx);

  const double half = h / 2.0 + kBoundaryTol;
  auto inside = [&](std::size_t i) {
    const auto xi = sample.x(i);
    for (int j = 0; j < d; ++j)
      if (std::abs(xi[j] - y[j]) > half)
        return false;
    return true;
  };

  std::size_t first = 0;
  std::size_t last = sample.size();
  if (d == 1) {
    // sorted design: restrict the scan to the candidate range
    const auto& c = sample.grid->coords();
    first = static_cast<std::size_t>(std::lower_bound(c.begin(), c.end(), y[0] - half) - c.begin());
    last = static_cast<std::size_t>(std::upper_bound(c.begin(), c.end(), y[0] + half) - c.begin());
  }
  for (std::size_t i = first; i < last; ++i)
    if (inside(i))
      win.members.push_back(i);

  if (win.members.empty())
    throw Error(ErrorKind::EmptyWindow, "no design point within h/2 of the evaluation point");

  const std::size_t dim_b = win.idx->size();
  win.x.reserve(win.members.size() * d);
  win.obs.reserve(win.members.size());
  win.basis.resize(win.members.size() * dim_b);
  std::vector<double> z(static_cast<std::size_t>(d));
  for (std::size_t r = 0; r < win.members.size(); ++r) {
    const auto xi = sample.x(win.members[r]);
    win.x.insert(win.x.end(), xi.begin(), xi.end());
    win.obs.push_back(sample.y_values[win.members[r]]);
    for (int j = 0; j < d; ++j)
      z[j] = (xi[j] - y[j]) / h;
    win.idx->basis(z, {win.basis.data() + r * dim_b, dim_b});
  }
  return win;
}

MomentMatrix design_matrix(const WindowData& win, std::size_t n)
{
  const auto dim_b = static_cast<Eigen::Index>(win.coeffs());
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(dim_b, dim_b);
  for (std::size_t i = 0; i < win.count(); ++i) {
    const Eigen::Map<const Eigen::VectorXd> k(win.basis_row(i).data(), dim_b);
    m.noalias() += k * k.transpose();
  }
  m /= static_cast<double>(n) * std::pow(win.h, win.dim());
  MomentMatrix out;
  out.lambda_min = std::max(0.0, smallest_eigenvalue(m));
  out.entries = std::move(m);
  return out;
}

Eigen::MatrixXd limit_moment_matrix(const MultiIndexSet& idx)
{
  auto moment = [](int k) {
    // integral of x^k over [-1/2, 1/2]
    return k % 2 == 1 ? 0.0 : 2.0 * std::pow(0.5, k + 1) / (k + 1);
  };
  const auto dim_b = static_cast<Eigen::Index>(idx.size());
  Eigen::MatrixXd m(dim_b, dim_b);
  for (Eigen::Index a = 0; a < dim_b; ++a) {
    for (Eigen::Index b = 0; b < dim_b; ++b) {
      double v = 1.0;
      const auto p = idx.index(static_cast<std::size_t>(a));
      const auto q = idx.index(static_cast<std::size_t>(b));
      for (int j = 0; j < idx.dim(); ++j)
        v *= moment(p[j] + q[j]);
      m(a, b) = v;
    }
  }
  return m;
}

LocalFit local_lse(const WindowData& win)
{
  const auto dim_b = static_cast<Eigen::Index>(win.coeffs());
  const MomentMatrix mm = design_matrix(win, win.sample_size);
  if (mm.lambda_min <= kSingularTolerance)
    throw Error(ErrorKind::SingularDesign, "moment matrix smallest eigenvalue " + std::to_string(mm.lambda_min) +
                                             " with " + std::to_string(win.count()) + " window points");

  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(dim_b);
  for (std::size_t i = 0; i < win.count(); ++i) {
    const Eigen::Map<const Eigen::VectorXd> k(win.basis_row(i).data(), dim_b);
    rhs += 2.0 * win.obs[i] * k;
  }
  const double norm = static_cast<double>(win.sample_size) * std::pow(win.h, win.dim());
  // the normalized matrix is better conditioned; rescale the right-hand side to match
  Eigen::LLT<Eigen::MatrixXd> llt(mm.entries);
  if (llt.info() != Eigen::Success)
    throw Error(ErrorKind::SingularDesign, "Cholesky factorization failed");
  const Eigen::VectorXd theta = llt.solve(rhs / norm);

  LocalFit fit;
  fit.lambda_min = mm.lambda_min;
  fit.theta.idx = win.idx;
  fit.delta.idx = win.idx;
  fit.theta.values.assign(theta.data(), theta.data() + dim_b);
  fit.delta.values.resize(static_cast<std::size_t>(dim_b));
  for (std::size_t k = 0; k < win.coeffs(); ++k)
    fit.delta.values[k] = win.idx->factorial(k) * std::pow(win.h, -win.idx->total_degree(k)) * theta(static_cast<Eigen::Index>(k));
  return fit;
}

PlugInBounds plug_in_bounds(const PolyCoeffs& delta)
{
  PlugInBounds b;
  b.a_hat = delta.values.at(0);
  b.m_hat = delta.l1_norm();
  if (!(b.a_hat > 0.0))
    throw Error(ErrorKind::NonPositiveAhat, "A-hat = " + std::to_string(b.a_hat));
  return b;
}

std::pair<double, double> validity_interval(std::size_t n, int b, int d)
{
  const double ln_n = std::log(static_cast<double>(n));
  const double dd = d;
  const double lower = std::max<double>(b + 1, std::pow(ln_n, 1.0 / (dd + dd * dd))) / std::pow(static_cast<double>(n), 1.0 / dd);
  const double upper = std::pow(1.0 / ln_n, 1.0 / (b + dd));
  return {lower, upper};
}

} // namespace mulreg
