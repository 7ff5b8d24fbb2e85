#include "mulreg/distribution.hpp"

#include "mulreg/error.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>

namespace mulreg {

namespace {

//! Smallest s in [lo, hi] with cdf(s) >= p, assuming cdf(hi) >= p.
template <class Cdf>
double bisect_quantile(const Cdf& cdf, double lo, double hi, double p)
{
  if (cdf(lo) >= p)
    return lo;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi || hi - lo <= 1e-15 * std::max(std::abs(lo), std::abs(hi)))
      break;
    if (cdf(mid) >= p)
      hi = mid;
    else
      lo = mid;
  }
  return hi;
}

//! Smallest s with cdf(s) >= p for a continuous cdf. Illinois false position
//! keeping cdf(lo) < p <= cdf(hi), with a bisection step whenever the bracket
//! fails to halve; hi converges to the lower quantile even across flat parts.
template <class Cdf>
double solve_quantile(const Cdf& cdf, double lo, double hi, double p)
{
  double flo = cdf(lo) - p;
  if (flo >= 0.0)
    return lo;
  double fhi = cdf(hi) - p;
  if (fhi <= 0.0)
    return hi;
  int side = 0;
  for (int it = 0; it < 200; ++it) {
    const double width = hi - lo;
    if (width <= 1e-14 * std::max({std::abs(lo), std::abs(hi), 1e-300}))
      break;
    double s = lo - flo * width / (fhi - flo);
    if (!(s > lo && s < hi))
      s = 0.5 * (lo + hi);
    const double fs = cdf(s) - p;
    const double before = width;
    if (fs < 0.0) {
      lo = s;
      flo = fs;
      if (side == -1)
        fhi *= 0.5;
      side = -1;
    } else {
      hi = s;
      fhi = fs;
      if (side == 1)
        flo *= 0.5;
      side = 1;
    }
    if (hi - lo > 0.5 * before) {
      // force progress on a stalled side
      const double mid = 0.5 * (lo + hi);
      const double fm = cdf(mid) - p;
      if (fm < 0.0) {
        lo = mid;
        flo = fm;
      } else {
        hi = mid;
        fhi = fm;
      }
      side = 0;
    }
  }
  return hi;
}

} // namespace

PiecewiseMixture::PiecewiseMixture(std::size_t knots_per_component, std::vector<double> knots,
                                   std::vector<double> cdf, std::vector<double> weights)
  : k_(knots_per_component)
{
  if (k_ < 2 || knots.size() != cdf.size() || knots.size() != k_ * weights.size())
    throw Error(ErrorKind::InvalidArgument, "inconsistent piecewise mixture layout");
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  if (!(total > 0.0) || !std::isfinite(total))
    throw Error(ErrorKind::InvalidArgument, "mixture weights must have positive finite sum");

  // keep only components carrying mass
  for (std::size_t c = 0; c < weights.size(); ++c) {
    if (!(weights[c] > 0.0))
      continue;
    w_.push_back(weights[c] / total);
    x_.insert(x_.end(), knots.begin() + c * k_, knots.begin() + (c + 1) * k_);
    f_.insert(f_.end(), cdf.begin() + c * k_, cdf.begin() + (c + 1) * k_);
  }
  int_f_.resize(x_.size());
  lo_ = std::numeric_limits<double>::infinity();
  hi_ = -lo_;
  for (std::size_t c = 0; c < w_.size(); ++c) {
    const double* x = x_.data() + c * k_;
    const double* f = f_.data() + c * k_;
    double* acc = int_f_.data() + c * k_;
    acc[0] = 0.0;
    for (std::size_t k = 1; k < k_; ++k)
      acc[k] = acc[k - 1] + 0.5 * (f[k] + f[k - 1]) * (x[k] - x[k - 1]);
    lo_ = std::min(lo_, x[0]);
    hi_ = std::max(hi_, x[k_ - 1]);
  }
}

double PiecewiseMixture::component_cdf(std::size_t c, double s) const
{
  const double* x = x_.data() + c * k_;
  const double* f = f_.data() + c * k_;
  if (s < x[0])
    return 0.0;
  if (s >= x[k_ - 1])
    return 1.0;
  const std::size_t k = static_cast<std::size_t>(std::upper_bound(x, x + k_, s) - x) - 1;
  const double width = x[k + 1] - x[k];
  if (!(width > 0.0))
    return f[k + 1];
  return f[k] + (f[k + 1] - f[k]) * (s - x[k]) / width;
}

double PiecewiseMixture::component_integral(std::size_t c, double s) const
{
  const double* x = x_.data() + c * k_;
  const double* f = f_.data() + c * k_;
  const double* acc = int_f_.data() + c * k_;
  if (s <= x[0])
    return 0.0;
  if (s >= x[k_ - 1])
    return acc[k_ - 1] + (s - x[k_ - 1]);
  const std::size_t k = static_cast<std::size_t>(std::upper_bound(x, x + k_, s) - x) - 1;
  const double fs = component_cdf(c, s);
  return acc[k] + 0.5 * (f[k] + fs) * (s - x[k]);
}

double PiecewiseMixture::cdf(double s) const
{
  double total = 0.0;
  for (std::size_t c = 0; c < w_.size(); ++c)
    total += w_[c] * component_cdf(c, s);
  return total;
}

double PiecewiseMixture::mean() const
{
  double total = 0.0;
  for (std::size_t c = 0; c < w_.size(); ++c)
    total += w_[c] * (x_[c * k_ + k_ - 1] - int_f_[c * k_ + k_ - 1]);
  return total;
}

double PiecewiseMixture::abs_dev(double s) const
{
  // E|s - U| = 2 int_{-inf}^{s} F + E U - s
  double total = 0.0;
  for (std::size_t c = 0; c < w_.size(); ++c) {
    const double mean_c = x_[c * k_ + k_ - 1] - int_f_[c * k_ + k_ - 1];
    total += w_[c] * (2.0 * component_integral(c, s) + mean_c - s);
  }
  return total;
}

double PiecewiseMixture::quantile(double p) const
{
  if (w_.size() == 1) {
    // the cdf is piecewise linear: invert the knot table directly
    const auto it = std::lower_bound(f_.begin(), f_.end(), p);
    if (it == f_.begin())
      return x_.front();
    if (it == f_.end())
      return x_.back();
    const auto k = static_cast<std::size_t>(it - f_.begin());
    const double df = f_[k] - f_[k - 1];
    if (!(df > 0.0))
      return x_[k - 1];
    return x_[k - 1] + (x_[k] - x_[k - 1]) * (p - f_[k - 1]) / df;
  }
  return bisect_quantile([this](double s) { return cdf(s); }, lo_, hi_, p);
}

double PiecewiseMixture::median() const
{
  return quantile(0.5);
}

WeightedAtoms::WeightedAtoms(std::vector<double> values, std::vector<double> weights)
{
  if (values.size() != weights.size() || values.empty())
    throw Error(ErrorKind::InvalidArgument, "atoms need matching nonempty values and weights");
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  if (!(total > 0.0) || !std::isfinite(total))
    throw Error(ErrorKind::InvalidArgument, "atom weights must have positive finite sum");

  v_.reserve(values.size());
  cum_w_.assign(1, 0.0);
  cum_wv_.assign(1, 0.0);
  for (std::size_t i : order) {
    if (!(weights[i] > 0.0))
      continue;
    const double w = weights[i] / total;
    v_.push_back(values[i]);
    cum_w_.push_back(cum_w_.back() + w);
    cum_wv_.push_back(cum_wv_.back() + w * values[i]);
  }
  total_wv_ = cum_wv_.back();
}

double WeightedAtoms::cdf(double s) const
{
  const auto k = static_cast<std::size_t>(std::upper_bound(v_.begin(), v_.end(), s) - v_.begin());
  return cum_w_[k] / cum_w_.back();
}

double WeightedAtoms::prob_below(double s) const
{
  const auto k = static_cast<std::size_t>(std::lower_bound(v_.begin(), v_.end(), s) - v_.begin());
  return cum_w_[k] / cum_w_.back();
}

double WeightedAtoms::abs_dev(double s) const
{
  const auto k = static_cast<std::size_t>(std::upper_bound(v_.begin(), v_.end(), s) - v_.begin());
  const double p = cum_w_[k];
  const double below = cum_wv_[k];
  return s * p - below + (total_wv_ - below) - s * (cum_w_.back() - p);
}

double WeightedAtoms::quantile(double p) const
{
  const double target = p * cum_w_.back();
  const auto it = std::lower_bound(cum_w_.begin() + 1, cum_w_.end(), target);
  const auto k = static_cast<std::size_t>(it - cum_w_.begin()) - 1;
  return v_[std::min(k, v_.size() - 1)];
}

double WeightedAtoms::median() const
{
  return quantile(0.5);
}

namespace {

//! int_0^w (a + b x + c x^2) e^x dx, given ew = e^w
double poly_exp_integral(double a, double b, double c, double w, double ew)
{
  if (w < 1e-4) {
    // series keeps the small-w case free of cancellation
    const double w2 = w * w;
    return a * w + (a + b) * w2 / 2.0 + (a + 2.0 * b + 2.0 * c) * w2 * w / 6.0
      + (a + 3.0 * b + 6.0 * c) * w2 * w2 / 24.0;
  }
  return ew * (a + b * (w - 1.0) + c * (w * w - 2.0 * w + 2.0)) - (a - b + 2.0 * c);
}

} // namespace

ColumnMixture::ColumnMixture(std::size_t knots, std::vector<double> lo, std::vector<double> scale,
                             std::vector<double> step, std::vector<double> density, std::vector<double> weights,
                             std::vector<double> widths)
  : k_(knots)
{
  const std::size_t n = weights.size();
  if (k_ < 2 || lo.size() != n || scale.size() != n || step.size() != n || density.size() != k_ * n)
    throw Error(ErrorKind::InvalidArgument, "inconsistent column mixture layout");
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  if (!(total > 0.0) || !std::isfinite(total))
    throw Error(ErrorKind::InvalidArgument, "mixture weights must have positive finite sum");

  q_.reserve(k_ * n);
  cum_.reserve(k_ * n);
  int_.reserve(k_ * n);
  comp_.reserve(n);
  std::vector<double> cum;
  lo_ = std::numeric_limits<double>::infinity();
  hi_ = -lo_;
  for (std::size_t c = 0; c < n; ++c) {
    if (!(weights[c] > 0.0))
      continue;
    Component comp{lo[c], scale[c], step[c], weights[c] / total, 0.0, 0.0, q_.size(), widths.empty() ? 0.0 : widths[c]};
    const double* q = density.data() + c * k_;
    cum.assign(k_, 0.0);
    for (std::size_t k = 1; k < k_; ++k)
      cum[k] = cum[k - 1] + 0.5 * (q[k - 1] + q[k]) * comp.step;
    const double mass = cum[k_ - 1];
    if (!(mass > 0.0))
      throw Error(ErrorKind::InvalidArgument, "column without mass");
    for (std::size_t k = 0; k < k_; ++k) {
      q_.push_back(q[k] / mass);
      cum_.push_back(cum[k] / mass);
    }
    cum_.back() = 1.0;
    const double* qn = q_.data() + comp.offset;
    const double* cn = cum_.data() + comp.offset;
    int_.push_back(0.0);
    const double ratio = std::exp(comp.step);
    double grow = 1.0;
    for (std::size_t k = 0; k + 1 < k_; ++k) {
      const double curv = (qn[k + 1] - qn[k]) / (2.0 * comp.step);
      int_.push_back(int_.back() + comp.scale * grow * poly_exp_integral(cn[k], qn[k], curv, comp.step, ratio));
      grow *= ratio;
    }
    comp.end = comp.lo + comp.scale * std::expm1(comp.step * static_cast<double>(k_ - 1));
    comp.int_end = int_.back();
    if (comp.width <= 1e-9 * (comp.end - comp.lo))
      comp.width = 0.0;
    lo_ = std::min(lo_, comp.lo - 0.5 * comp.width);
    hi_ = std::max(hi_, comp.end + 0.5 * comp.width);
    comp_.push_back(comp);
  }
}

double ColumnMixture::component_cdf(const Component& c, double s) const
{
  if (c.width == 0.0)
    return raw_cdf(c, s);
  const double h = 0.5 * c.width;
  if (s + h <= c.lo)
    return 0.0;
  if (s - h >= c.end)
    return 1.0;
  return (raw_integral(c, s + h) - raw_integral(c, s - h)) / c.width;
}

double ColumnMixture::raw_cdf(const Component& c, double s) const
{
  if (s <= c.lo)
    return 0.0;
  if (s >= c.end)
    return 1.0;
  const double v = std::log1p((s - c.lo) / c.scale);
  const std::size_t k = std::min(static_cast<std::size_t>(v / c.step), k_ - 2);
  const double w = v - c.step * static_cast<double>(k);
  const double* q = q_.data() + c.offset;
  const double* cum = cum_.data() + c.offset;
  return std::min(1.0, cum[k] + q[k] * w + (q[k + 1] - q[k]) * w * w / (2.0 * c.step));
}

double ColumnMixture::raw_integral(const Component& c, double s) const
{
  if (s <= c.lo)
    return 0.0;
  if (s >= c.end)
    return c.int_end + (s - c.end);
  const double v = std::log1p((s - c.lo) / c.scale);
  const std::size_t k = std::min(static_cast<std::size_t>(v / c.step), k_ - 2);
  const double vk = c.step * static_cast<double>(k);
  const double* q = q_.data() + c.offset;
  const double* cum = cum_.data() + c.offset;
  const double curv = (q[k + 1] - q[k]) / (2.0 * c.step);
  const double w = v - vk;
  return int_[c.offset + k] + c.scale * std::exp(vk) * poly_exp_integral(cum[k], q[k], curv, w, std::exp(w));
}

double ColumnMixture::cdf(double s) const
{
  double total = 0.0;
  for (const auto& c : comp_)
    total += c.weight * component_cdf(c, s);
  return total;
}

double ColumnMixture::mean() const
{
  double total = 0.0;
  for (const auto& c : comp_)
    total += c.weight * (c.end - c.int_end);
  return total;
}

double ColumnMixture::abs_dev(double s) const
{
  // 5-point Gauss-Legendre over the smoothing kernel; the unsmoothed
  // E|s - U| is C^1 and convex, so this is exact to round-off in practice
  static constexpr std::array<double, 5> node{0.0, -0.5384693101056831, 0.5384693101056831, -0.9061798459386640,
                                              0.9061798459386640};
  static constexpr std::array<double, 5> weight{0.5688888888888889, 0.4786286704993665, 0.4786286704993665,
                                                0.2369268850561891, 0.2369268850561891};
  double total = 0.0;
  for (const auto& c : comp_) {
    const double mean_c = c.end - c.int_end;
    double dev = 0.0;
    if (c.width == 0.0) {
      dev = 2.0 * raw_integral(c, s) + mean_c - s;
    } else {
      for (std::size_t g = 0; g < node.size(); ++g) {
        const double t = s + 0.5 * c.width * node[g];
        dev += 0.5 * weight[g] * (2.0 * raw_integral(c, t) + mean_c - t);
      }
    }
    total += c.weight * dev;
  }
  return total;
}

double ColumnMixture::quantile(double p) const
{
  return solve_quantile([this](double s) { return cdf(s); }, lo_, hi_, p);
}

double ColumnMixture::median() const
{
  return quantile(0.5);
}

PiecewiseMixture histogram(std::span<const double> edges, std::span<const double> masses)
{
  if (edges.size() != masses.size() + 1)
    throw Error(ErrorKind::InvalidArgument, "histogram needs one more edge than cells");
  std::vector<double> cdf(edges.size(), 0.0);
  for (std::size_t k = 0; k < masses.size(); ++k)
    cdf[k + 1] = cdf[k] + masses[k];
  const double total = cdf.back();
  if (!(total > 0.0))
    throw Error(ErrorKind::InvalidArgument, "histogram has no mass");
  for (double& v : cdf)
    v /= total;
  cdf.back() = 1.0;
  return PiecewiseMixture(edges.size(), std::vector<double>(edges.begin(), edges.end()), std::move(cdf), {1.0});
}

} // namespace mulreg
