#include "mulreg/param_set.hpp"

#include "mulreg/error.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

namespace mulreg {

ParamSet::ParamSet(double a, double m, IndexSetPtr index)
  : a_low(a), m_up(m), idx(std::move(index))
{
  if (!(a_low > 0.0) || !(m_up > a_low) || !std::isfinite(m_up))
    throw Error(ErrorKind::InvalidBounds, "need 0 < A=" + std::to_string(a_low) + " < M=" + std::to_string(m_up));
}

bool membership(std::span<const double> t, const ParamSet& set, double tol)
{
  double l1 = 0.0;
  for (double v : t)
    l1 += std::abs(v);
  return 2.0 * t[0] - l1 >= set.a_low - tol && l1 <= set.m_up + tol;
}

bool membership(const PolyCoeffs& t, const ParamSet& set, double tol)
{
  return membership(std::span<const double>(t.values), set, tol);
}

std::vector<double> project_l1_ball(std::span<const double> v, double radius)
{
  std::vector<double> out(v.begin(), v.end());
  double l1 = 0.0;
  for (double x : v)
    l1 += std::abs(x);
  if (l1 <= radius)
    return out;
  if (radius <= 0.0) {
    std::fill(out.begin(), out.end(), 0.0);
    return out;
  }
  std::vector<double> u(v.size());
  for (std::size_t i = 0; i < v.size(); ++i)
    u[i] = std::abs(v[i]);
  std::sort(u.begin(), u.end(), std::greater<>());
  double cum = 0.0;
  double shift = 0.0;
  for (std::size_t j = 0; j < u.size(); ++j) {
    cum += u[j];
    const double cand = (cum - radius) / static_cast<double>(j + 1);
    if (u[j] - cand > 0.0)
      shift = cand;
  }
  for (std::size_t i = 0; i < v.size(); ++i)
    out[i] = std::copysign(std::max(std::abs(v[i]) - shift, 0.0), v[i]);
  return out;
}

std::vector<double> project_onto(std::span<const double> t, const ParamSet& set)
{
  std::vector<double> out(t.begin(), t.end());
  if (membership(t, set))
    return out;
  const double a = set.a_low;
  const double m = set.m_up;
  if (t.size() == 1) {
    out[0] = std::clamp(t[0], a, m);
    return out;
  }
  const std::span<const double> rest = t.subspan(1);
  auto radius = [&](double s0) { return std::max(0.0, std::min(s0 - a, m - s0)); };
  auto objective = [&](double s0) {
    const auto p = project_l1_ball(rest, radius(s0));
    double d2 = (s0 - t[0]) * (s0 - t[0]);
    for (std::size_t i = 0; i < p.size(); ++i)
      d2 += (p[i] - rest[i]) * (p[i] - rest[i]);
    return d2;
  };

  // golden-section search on the convex profile over s0 in [A, M]
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double lo = a;
  double hi = m;
  double x1 = hi - inv_phi * (hi - lo);
  double x2 = lo + inv_phi * (hi - lo);
  double f1 = objective(x1);
  double f2 = objective(x2);
  for (int it = 0; it < 300 && hi - lo > 1e-15 * std::max(1.0, std::abs(hi)); ++it) {
    if (f1 <= f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - inv_phi * (hi - lo);
      f1 = objective(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + inv_phi * (hi - lo);
      f2 = objective(x2);
    }
  }
  const double s0 = 0.5 * (lo + hi);
  const auto p = project_l1_ball(rest, radius(s0));
  out[0] = s0;
  std::copy(p.begin(), p.end(), out.begin() + 1);
  return out;
}

} // namespace mulreg
