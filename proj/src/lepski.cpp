#include "mulreg/lepski.hpp"

#include "mulreg/error.hpp"
#include "mulreg/rng.hpp"

#include <cmath>
#include <limits>

namespace mulreg {

BandwidthGrid bandwidth_grid(std::size_t n, int b, int d)
{
  if (n < 2 || b < 0 || d < 1)
    throw Error(ErrorKind::InvalidArgument, "bandwidth grid needs n >= 2, b >= 0, d >= 1");
  const double nd = static_cast<double>(n);
  BandwidthGrid g;
  g.h_max = std::pow(nd, -1.0 / (b + d));
  g.h_min = std::pow(std::log(nd), static_cast<double>(b) / (d * (b + d))) * std::pow(nd, -1.0 / d);
  for (double h = g.h_max; h >= g.h_min; h *= 0.5)
    g.h.push_back(h);
  if (g.h.size() < 2)
    throw Error(ErrorKind::DegenerateGrid, "h_min = " + std::to_string(g.h_min) + " leaves fewer than two scales below h_max = "
                                             + std::to_string(g.h_max));
  return g;
}

std::string to_string(ThresholdMode m)
{
  return m == ThresholdMode::Theory ? "theory" : "practical";
}

ThresholdMode parse_threshold_mode(const std::string& s)
{
  if (s == "theory")
    return ThresholdMode::Theory;
  if (s == "practical")
    return ThresholdMode::Practical;
  throw Error(ErrorKind::InvalidArgument, "mode must be theory or practical, got '" + s + "'");
}

double theory_constant(std::size_t coeff_count, double q, int d)
{
  const double db = static_cast<double>(coeff_count);
  return 432.0 * db * db * db * (32.0 * q * d + 16.0);
}

double threshold(int l, std::size_t n, int d, double h_l, double lambda_l, std::size_t coeff_count,
                 const ThresholdParams& params)
{
  if (!(lambda_l > kSingularTolerance))
    return std::numeric_limits<double>::infinity();
  const double c = params.mode == ThresholdMode::Theory ? theory_constant(coeff_count, params.q, d) : params.c_thr;
  return c / lambda_l * (1.0 + l * std::log(2.0)) / (static_cast<double>(n) * std::pow(h_l, d));
}

ParamSet random_param_set(double a_hat, double m_hat, IndexSetPtr idx)
{
  if (!(a_hat > 0.0))
    throw Error(ErrorKind::InvalidBounds, "A-hat must be positive, got " + std::to_string(a_hat));
  return ParamSet(0.5 * a_hat, 4.0 * m_hat, std::move(idx));
}

int select_index(std::span<const double> estimates, std::span<const double> thresholds, double m_hat)
{
  const int last = static_cast<int>(estimates.size()) - 1;
  for (int k = 0; k < last; ++k) {
    bool ok = true;
    for (int l = k + 1; l <= last && ok; ++l)
      ok = std::abs(estimates[k] - estimates[l]) <= m_hat * thresholds[l];
    if (ok)
      return k;
  }
  return last;
}

SelectionTrace assemble_trace(std::vector<ScaleEstimate> estimates, double a_hat, double m_hat,
                              const ThresholdParams& params)
{
  SelectionTrace t;
  t.a_hat = a_hat;
  t.m_hat = m_hat;
  t.params = params;
  std::vector<double> f(estimates.size());
  std::vector<double> s(estimates.size());
  for (std::size_t k = 0; k < estimates.size(); ++k) {
    f[k] = estimates[k].f_hat;
    s[k] = estimates[k].s_n;
  }
  for (std::size_t k = 0; k < estimates.size(); ++k) {
    for (std::size_t l = k + 1; l < estimates.size(); ++l) {
      Comparison c;
      c.k = static_cast<int>(k);
      c.l = static_cast<int>(l);
      c.difference = std::abs(f[k] - f[l]);
      c.bound = m_hat * s[l];
      c.pass = c.difference <= c.bound;
      t.comparisons.push_back(c);
    }
  }
  t.k_hat = select_index(f, s, m_hat);
  t.estimates = std::move(estimates);
  return t;
}

bool trace_consistent(const SelectionTrace& trace)
{
  const int last = static_cast<int>(trace.estimates.size()) - 1;
  auto passes = [&](int k) {
    for (const auto& c : trace.comparisons)
      if (c.k == k && !c.pass)
        return false;
    return true;
  };
  for (const auto& c : trace.comparisons) {
    const auto& ek = trace.estimates[static_cast<std::size_t>(c.k)];
    const auto& el = trace.estimates[static_cast<std::size_t>(c.l)];
    if (c.difference != std::abs(ek.f_hat - el.f_hat) || c.bound != trace.m_hat * el.s_n
        || c.pass != (c.difference <= c.bound))
      return false;
  }
  if (trace.k_hat < 0 || trace.k_hat > last || !passes(trace.k_hat))
    return false;
  for (int k = 0; k < trace.k_hat; ++k)
    if (passes(k))
      return false;
  return true;
}

PlugIn plug_in(const Sample& sample, std::span<const double> y, double h_max, IndexSetPtr idx)
{
  const WindowData top = window(sample, y, h_max, idx);
  const LocalFit fit = local_lse(top);
  const PlugInBounds bounds = plug_in_bounds(fit.delta);
  return {bounds, random_param_set(bounds.a_hat, bounds.m_hat, std::move(idx))};
}

ScaleEstimate scale_estimate(const Sample& sample, std::span<const double> y, int k, double h,
                             const ParamSet& set, const IntegratorConfig& cfg, const ThresholdParams& params)
{
  const WindowData win = window(sample, y, h, set.idx);
  ScaleEstimate e;
  e.k = k;
  e.h = h;
  e.window_count = win.count();
  e.lambda = design_matrix(win, sample.size()).lambda_min;
  e.s_n = threshold(k, sample.size(), win.dim(), h, e.lambda, set.dim(), params);
  IntegratorConfig scale_cfg = cfg;
  scale_cfg.seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(k));
  try {
    e.f_hat = bayes_estimate(win, set, scale_cfg).f_hat;
  } catch (const Error& err) {
    if (err.kind() != ErrorKind::EmptyPosteriorSupport)
      throw;
    e.f_hat = win.max_obs();
    e.fallback = true;
  }
  return e;
}

AdaptiveResult adaptive_estimate(const Sample& sample, std::span<const double> y, int b,
                                 const IntegratorConfig& cfg, const ThresholdParams& params)
{
  const int d = sample.grid->dim();
  const BandwidthGrid grid = bandwidth_grid(sample.size(), b, d);
  const IndexSetPtr idx = multi_indices(d, b);
  const PlugIn pre = plug_in(sample, y, grid.h_max, idx);
  std::vector<ScaleEstimate> est;
  for (int k = 0; k <= grid.last(); ++k)
    est.push_back(scale_estimate(sample, y, k, grid.h[static_cast<std::size_t>(k)], pre.set, cfg, params));
  AdaptiveResult r;
  r.trace = assemble_trace(std::move(est), pre.bounds.a_hat, pre.bounds.m_hat, params);
  r.f_hat = r.trace.f_hat();
  return r;
}

} // namespace mulreg
