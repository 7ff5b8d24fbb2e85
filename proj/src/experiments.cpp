#include "mulreg/experiments.hpp"

#include "mulreg/error.hpp"
#include "mulreg/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <optional>

namespace mulreg {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

//! FNV-1a, so cell seeds depend on the function name and not on the order of
//! the table rows.
std::uint64_t name_hash(const std::string& s)
{
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t cell_seed(std::uint64_t master, const std::string& fn, std::size_t n)
{
  return derive_seed(master ^ name_hash(fn), n);
}

std::vector<double> point_of(double y, int d)
{
  return std::vector<double>(static_cast<std::size_t>(d), y);
}

//! Bayes estimate at h, or the window maximum when the posterior is empty.
double bayes_or_max(const Sample& sample, std::span<const double> y, double h, const ParamSet& set,
                    const IntegratorConfig& cfg, bool* fallback = nullptr)
{
  const WindowData win = window(sample, y, h, set.idx);
  try {
    return bayes_estimate(win, set, cfg).f_hat;
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::EmptyPosteriorSupport)
      throw;
    if (fallback)
      *fallback = true;
    return win.max_obs();
  }
}

void check_failures(std::size_t failures, std::size_t total, const std::string& what)
{
  if (total > 0 && static_cast<double>(failures) > kMaxFailureFraction * static_cast<double>(total))
    throw Error(ErrorKind::ReplicationFailure, what + ": " + std::to_string(failures) + " of " + std::to_string(total)
                                                 + " estimates failed");
}

double mean_of(std::span<const double> v)
{
  return mean_se(v).mean;
}

} // namespace

std::string to_string(EstimatorKind k)
{
  switch (k) {
  case EstimatorKind::Fixed: return "fixed";
  case EstimatorKind::Adaptive: return "adaptive";
  case EstimatorKind::Minimax: return "minimax";
  case EstimatorKind::Lse: return "lse";
  }
  return "unknown";
}

EstimatorKind parse_estimator(const std::string& s)
{
  for (auto k : {EstimatorKind::Fixed, EstimatorKind::Adaptive, EstimatorKind::Minimax, EstimatorKind::Lse})
    if (to_string(k) == s)
      return k;
  throw Error(ErrorKind::InvalidArgument, "unknown estimator '" + s + "'");
}

double run_estimator(const EstimatorSpec& spec, const Sample& sample, std::span<const double> y, double* h_used)
{
  const int d = sample.grid->dim();
  const IndexSetPtr idx = multi_indices(d, spec.b);
  switch (spec.kind) {
  case EstimatorKind::Fixed: {
    const ParamSet set = spec.known_bounds
      ? ParamSet(spec.a_low, spec.m_up, idx)
      : plug_in(sample, y, bandwidth_grid(sample.size(), spec.b, d).h_max, idx).set;
    if (h_used)
      *h_used = spec.h;
    return bayes_or_max(sample, y, spec.h, set, spec.integrator);
  }
  case EstimatorKind::Adaptive: {
    const AdaptiveResult r = adaptive_estimate(sample, y, spec.b, spec.integrator, spec.thresholds);
    if (h_used)
      *h_used = r.trace.h_hat();
    return r.f_hat;
  }
  case EstimatorKind::Minimax: {
    if (h_used)
      *h_used = minimax_bandwidth(spec.beta, spec.lipschitz, sample.size(), d);
    return minimax_estimate(sample, y, spec.beta, spec.lipschitz, spec.a_low, spec.m_up, spec.b, spec.integrator).f_hat;
  }
  case EstimatorKind::Lse: {
    if (h_used)
      *h_used = spec.h;
    return local_lse(window(sample, y, spec.h, idx)).theta[0];
  }
  }
  throw Error(ErrorKind::InvalidArgument, "unhandled estimator kind");
}

MeanSe mean_se(std::span<const double> v)
{
  MeanSe r;
  double sum = 0.0;
  for (double x : v)
    if (std::isfinite(x)) {
      sum += x;
      ++r.count;
    }
  if (r.count == 0) {
    r.mean = kNaN;
    r.se = kNaN;
    return r;
  }
  r.mean = sum / static_cast<double>(r.count);
  if (r.count < 2)
    return r;
  double ss = 0.0;
  for (double x : v)
    if (std::isfinite(x))
      ss += (x - r.mean) * (x - r.mean);
  r.se = std::sqrt(ss / static_cast<double>(r.count - 1) / static_cast<double>(r.count));
  return r;
}

RiskReport mc_risk(const EstimatorSpec& spec, const FunctionSpec& f, std::span<const double> y, std::size_t n, int d,
                   const RunOptions& opts)
{
  if (opts.reps < 2)
    throw Error(ErrorKind::InvalidArgument, "mc_risk needs reps >= 2");
  const auto grid = std::make_shared<const DesignGrid>(make_grid(d, n));
  const double truth = f(y);
  struct Rep {
    double err = kNaN;
    double h = kNaN;
  };
  const auto reps = replicate<Rep>(opts.backend, opts.reps, opts.workers, [&](std::size_t r) {
    Rep out;
    const Sample s = simulate(f, grid, derive_seed(opts.master_seed, r), opts.noise);
    try {
      double h = 0.0;
      out.err = std::abs(run_estimator(spec, s, y, &h) - truth);
      out.h = h;
    } catch (const Error& e) {
      if (is_validation_error(e.kind()))
        throw;
    }
    return out;
  });

  RiskReport rep;
  rep.function_id = f.id;
  rep.estimator = to_string(spec.kind);
  rep.n = n;
  rep.y.assign(y.begin(), y.end());
  rep.reps = opts.reps;
  std::vector<double> errs;
  std::vector<double> hs;
  for (const auto& r : reps) {
    errs.push_back(r.err);
    if (std::isfinite(r.err)) {
      hs.push_back(r.h);
      ++rep.bandwidth_histogram[r.h];
    } else {
      ++rep.failures;
    }
  }
  check_failures(rep.failures, opts.reps, "mc_risk");
  const MeanSe m = mean_se(errs);
  rep.risk = m.mean;
  rep.se = m.se;
  rep.mean_bandwidth = mean_of(hs);
  return rep;
}

std::size_t argmin_prefer_larger(std::span<const double> risks, std::span<const double> h)
{
  std::size_t best = risks.size();
  for (std::size_t c = 0; c < risks.size(); ++c) {
    if (!std::isfinite(risks[c]))
      continue;
    if (best == risks.size() || risks[c] < risks[best] || (risks[c] == risks[best] && h[c] > h[best]))
      best = c;
  }
  if (best == risks.size())
    throw Error(ErrorKind::ReplicationFailure, "no candidate bandwidth produced a finite risk");
  return best;
}

OracleResult oracle_bandwidth(const EstimatorSpec& spec, const FunctionSpec& f, std::span<const double> y,
                              std::size_t n, int d, std::span<const double> h_candidates, const RunOptions& opts)
{
  if (h_candidates.empty())
    throw Error(ErrorKind::InvalidArgument, "oracle needs at least one candidate bandwidth");
  if (spec.kind != EstimatorKind::Fixed && spec.kind != EstimatorKind::Lse)
    throw Error(ErrorKind::InvalidArgument, "oracle search needs a fixed-bandwidth estimator");
  for (double h : h_candidates)
    if (!window_in_domain(y, h))
      throw Error(ErrorKind::WindowOutOfDomain, "candidate h = " + std::to_string(h) + " leaves [0,1]^d");
  const auto grid = std::make_shared<const DesignGrid>(make_grid(d, n));
  const double truth = f(y);
  const IndexSetPtr idx = multi_indices(d, spec.b);
  const std::size_t c_count = h_candidates.size();

  const auto reps = replicate<std::vector<double>>(opts.backend, opts.reps, opts.workers, [&](std::size_t r) {
    std::vector<double> err(c_count, kNaN);
    const Sample s = simulate(f, grid, derive_seed(opts.master_seed, r), opts.noise);
    try {
      std::optional<ParamSet> set;
      if (spec.kind == EstimatorKind::Fixed)
        set = spec.known_bounds ? ParamSet(spec.a_low, spec.m_up, idx)
                                : plug_in(s, y, bandwidth_grid(n, spec.b, d).h_max, idx).set;
      for (std::size_t c = 0; c < c_count; ++c) {
        try {
          const double est = spec.kind == EstimatorKind::Fixed
            ? bayes_or_max(s, y, h_candidates[c], *set, spec.integrator)
            : local_lse(window(s, y, h_candidates[c], idx)).theta[0];
          err[c] = std::abs(est - truth);
        } catch (const Error& e) {
          if (is_validation_error(e.kind()))
            throw;
        }
      }
    } catch (const Error& e) {
      if (is_validation_error(e.kind()))
        throw;
    }
    return err;
  });

  OracleResult out;
  out.candidates.assign(h_candidates.begin(), h_candidates.end());
  std::vector<double> col(opts.reps);
  for (std::size_t c = 0; c < c_count; ++c) {
    for (std::size_t r = 0; r < opts.reps; ++r)
      col[r] = reps[r][c];
    const MeanSe m = mean_se(col);
    out.risks.push_back(m.mean);
    out.ses.push_back(m.se);
    out.failures += opts.reps - m.count;
  }
  check_failures(out.failures, opts.reps * c_count, "oracle_bandwidth");
  const std::size_t best = argmin_prefer_larger(out.risks, out.candidates);
  out.h_tilde = out.candidates[best];
  out.risk = out.risks[best];
  return out;
}

std::vector<double> evaluation_points(std::size_t count, double h_max)
{
  std::vector<double> out;
  for (std::size_t j = 1; j <= count; ++j) {
    const double y = (static_cast<double>(j) - 0.5) / static_cast<double>(count);
    if (window_in_domain(std::span<const double>(&y, 1), h_max))
      out.push_back(y);
  }
  return out;
}

std::vector<double> ladder_with_midpoints(const BandwidthGrid& grid)
{
  std::vector<double> out;
  for (std::size_t k = 0; k < grid.h.size(); ++k) {
    out.push_back(grid.h[k]);
    if (k + 1 < grid.h.size())
      out.push_back(std::sqrt(grid.h[k] * grid.h[k + 1]));
  }
  return out;
}

namespace {

//! Errors for one (rep, point): one per candidate, then the adaptive error and
//! the selected bandwidth; NaN on failure.
struct PointOutcome {
  std::vector<double> cand;
  double adaptive = kNaN;
  double h_hat = kNaN;
  bool fallback = false;
};

TableRow table_cell(const TableConfig& cfg, const std::string& fn, std::size_t n)
{
  const int d = 1;
  const FunctionSpec f = test_function(fn);
  const auto grid = std::make_shared<const DesignGrid>(make_grid(d, n));
  const BandwidthGrid ladder = bandwidth_grid(n, cfg.b, d);
  const std::vector<double> cands = ladder_with_midpoints(ladder);
  const std::vector<double> ys = evaluation_points(cfg.points, ladder.h_max);
  const IndexSetPtr idx = multi_indices(d, cfg.b);
  const std::uint64_t seed = cell_seed(cfg.run.master_seed, fn, n);
  const std::size_t np = ys.size();
  const std::size_t nc = cands.size();

  const auto reps = replicate<std::vector<PointOutcome>>(cfg.run.backend, cfg.run.reps, cfg.run.workers, [&](std::size_t r) {
    std::vector<PointOutcome> out(np);
    const Sample s = simulate(f, grid, derive_seed(seed, r), cfg.run.noise);
    for (std::size_t p = 0; p < np; ++p) {
      PointOutcome& o = out[p];
      o.cand.assign(nc, kNaN);
      const std::span<const double> y(&ys[p], 1);
      const double truth = f(y);
      try {
        const PlugIn pre = plug_in(s, y, ladder.h_max, idx);
        std::vector<ScaleEstimate> scales;
        for (std::size_t c = 0; c < nc; ++c) {
          if (c % 2 == 0) {
            const int k = static_cast<int>(c / 2);
            scales.push_back(scale_estimate(s, y, k, cands[c], pre.set, cfg.integrator, cfg.thresholds));
            o.cand[c] = std::abs(scales.back().f_hat - truth);
            o.fallback = o.fallback || scales.back().fallback;
          } else {
            bool fb = false;
            o.cand[c] = std::abs(bayes_or_max(s, y, cands[c], pre.set, cfg.integrator, &fb) - truth);
            o.fallback = o.fallback || fb;
          }
        }
        const SelectionTrace t = assemble_trace(std::move(scales), pre.bounds.a_hat, pre.bounds.m_hat, cfg.thresholds);
        o.adaptive = std::abs(t.f_hat() - truth);
        o.h_hat = t.h_hat();
      } catch (const Error& e) {
        if (is_validation_error(e.kind()))
          throw;
        o.cand.assign(nc, kNaN);
        o.adaptive = kNaN;
      }
    }
    return out;
  });

  TableRow row;
  row.function_id = fn;
  row.n = n;
  row.points = np;
  const std::size_t reps_n = cfg.run.reps;
  std::vector<double> col(reps_n);
  std::vector<std::size_t> best(np);
  std::vector<double> ratios;
  std::vector<double> h_hats;
  for (std::size_t p = 0; p < np; ++p) {
    std::vector<double> risk(nc);
    for (std::size_t c = 0; c < nc; ++c) {
      for (std::size_t r = 0; r < reps_n; ++r)
        col[r] = reps[r][p].cand[c];
      risk[c] = mean_of(col);
    }
    best[p] = argmin_prefer_larger(risk, cands);
    for (std::size_t r = 0; r < reps_n; ++r) {
      col[r] = reps[r][p].adaptive;
      if (std::isfinite(reps[r][p].adaptive))
        h_hats.push_back(reps[r][p].h_hat);
      else
        ++row.failures;
      if (reps[r][p].fallback)
        ++row.fallbacks;
    }
    const double adaptive = mean_of(col);
    const double oracle = risk[best[p]];
    ratios.push_back(adaptive > 0.0 ? oracle / adaptive : 1.0);
    row.per_point.push_back({ys[p], f(std::span<const double>(&ys[p], 1)), adaptive, oracle, cands[best[p]]});
  }
  check_failures(row.failures, reps_n * np, "risk table " + fn + " n=" + std::to_string(n));

  // per-rep averages over points give the Monte Carlo standard errors
  std::vector<double> a_rep(reps_n);
  std::vector<double> o_rep(reps_n);
  for (std::size_t r = 0; r < reps_n; ++r) {
    double a = 0.0;
    double o = 0.0;
    std::size_t cnt = 0;
    for (std::size_t p = 0; p < np; ++p) {
      const double av = reps[r][p].adaptive;
      const double ov = reps[r][p].cand[best[p]];
      if (std::isfinite(av) && std::isfinite(ov)) {
        a += av;
        o += ov;
        ++cnt;
      }
    }
    a_rep[r] = cnt ? a / static_cast<double>(cnt) : kNaN;
    o_rep[r] = cnt ? o / static_cast<double>(cnt) : kNaN;
  }
  row.adaptive_risk = 0.0;
  row.oracle_risk = 0.0;
  for (const auto& pp : row.per_point) {
    row.adaptive_risk += pp[2];
    row.oracle_risk += pp[3];
  }
  row.adaptive_risk /= static_cast<double>(np);
  row.oracle_risk /= static_cast<double>(np);
  row.adaptive_se = mean_se(a_rep).se;
  row.oracle_se = mean_se(o_rep).se;
  const MeanSe rm = mean_se(ratios);
  row.ratio = rm.mean;
  row.ratio_se = rm.se;
  row.mean_h_hat = mean_of(h_hats);
  return row;
}

} // namespace

std::vector<TableRow> replicate_risk_table(const TableConfig& cfg)
{
  if (cfg.run.reps < 2)
    throw Error(ErrorKind::InvalidArgument, "risk table needs reps >= 2");
  std::vector<TableRow> rows;
  for (const auto& fn : cfg.functions)
    for (std::size_t n : cfg.ns)
      rows.push_back(table_cell(cfg, fn, n));
  return rows;
}

F4Report replicate_f4(const F4Config& cfg)
{
  if (cfg.run.reps < 2)
    throw Error(ErrorKind::InvalidArgument, "f4 replication needs reps >= 2");
  const int d = 1;
  const FunctionSpec f = test_function("f4");
  const auto grid = std::make_shared<const DesignGrid>(make_grid(d, cfg.n));
  const BandwidthGrid ladder = bandwidth_grid(cfg.n, cfg.b, d);
  const IndexSetPtr idx = multi_indices(d, cfg.b);
  const std::span<const double> y(&cfg.y, 1);
  if (!window_in_domain(y, cfg.h_star) || !window_in_domain(y, ladder.h_max))
    throw Error(ErrorKind::WindowOutOfDomain, "f4 windows must stay inside [0,1]");
  const double truth = f(y);
  const std::uint64_t seed = cell_seed(cfg.run.master_seed, "f4", cfg.n);

  struct Rep {
    double parametric = kNaN;
    double adaptive = kNaN;
    double h_hat = kNaN;
  };
  const auto reps = replicate<Rep>(cfg.run.backend, cfg.run.reps, cfg.run.workers, [&](std::size_t r) {
    Rep out;
    const Sample s = simulate(f, grid, derive_seed(seed, r), cfg.run.noise);
    try {
      const PlugIn pre = plug_in(s, y, ladder.h_max, idx);
      out.parametric = std::abs(bayes_or_max(s, y, cfg.h_star, pre.set, cfg.integrator) - truth);
      std::vector<ScaleEstimate> scales;
      for (int k = 0; k <= ladder.last(); ++k)
        scales.push_back(scale_estimate(s, y, k, ladder.h[static_cast<std::size_t>(k)], pre.set, cfg.integrator,
                                        cfg.thresholds));
      const SelectionTrace t = assemble_trace(std::move(scales), pre.bounds.a_hat, pre.bounds.m_hat, cfg.thresholds);
      out.adaptive = std::abs(t.f_hat() - truth);
      out.h_hat = t.h_hat();
    } catch (const Error& e) {
      if (is_validation_error(e.kind()))
        throw;
      out = Rep{};
    }
    return out;
  });

  F4Report rep;
  rep.reps = cfg.run.reps;
  std::vector<double> p, a, h;
  for (const auto& r : reps) {
    if (!std::isfinite(r.adaptive)) {
      ++rep.failures;
      continue;
    }
    p.push_back(r.parametric);
    a.push_back(r.adaptive);
    h.push_back(r.h_hat);
    ++rep.bandwidth_histogram[r.h_hat];
  }
  check_failures(rep.failures, rep.reps, "f4 replication");
  const MeanSe pm = mean_se(p);
  const MeanSe am = mean_se(a);
  rep.parametric_risk = pm.mean;
  rep.parametric_se = pm.se;
  rep.adaptive_risk = am.mean;
  rep.adaptive_se = am.se;
  rep.mean_bandwidth = mean_of(h);
  return rep;
}

std::vector<double> rate_candidates(std::size_t n, int b, double y)
{
  const double floor_h = std::max(4.0 / static_cast<double>(n), bandwidth_grid(n, b, 1).h_min);
  std::vector<double> out;
  for (int j = 2;; ++j) {
    const double h = std::pow(2.0, -0.5 * j);
    if (h < floor_h)
      break;
    if (window_in_domain(std::span<const double>(&y, 1), h))
      out.push_back(h);
  }
  return out;
}

LineFit fit_line(std::span<const double> x, std::span<const double> y)
{
  if (x.size() != y.size() || x.size() < 2)
    throw Error(ErrorKind::InvalidArgument, "line fit needs at least two matching points");
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (!(sxx > 0.0))
    throw Error(ErrorKind::InvalidArgument, "line fit needs distinct abscissae");
  LineFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.r2 = syy > 0.0 ? sxy * sxy / (sxx * syy) : 1.0;
  return fit;
}

RateFit rate_slope(const RateConfig& cfg)
{
  if (cfg.ns.size() < 3)
    throw Error(ErrorKind::InvalidArgument, "rate fit needs at least three sample sizes");
  const int d = 1;
  const FunctionSpec f = test_function(cfg.function_id);
  RateFit fit;
  fit.ns = cfg.ns;
  fit.target = -cfg.beta_nominal / (cfg.beta_nominal + d);
  fit.baseline_target = -cfg.beta_nominal / (2.0 * cfg.beta_nominal + d);
  const std::span<const double> y(&cfg.y, 1);

  for (std::size_t n : cfg.ns) {
    const std::vector<double> cands = rate_candidates(n, cfg.b, cfg.y);
    RunOptions run = cfg.run;
    run.master_seed = cell_seed(cfg.run.master_seed, cfg.function_id, n);

    EstimatorSpec bayes;
    bayes.kind = EstimatorKind::Fixed;
    bayes.b = cfg.b;
    bayes.integrator = cfg.integrator;
    const OracleResult ob = oracle_bandwidth(bayes, f, y, n, d, cands, run);

    EstimatorSpec lse = bayes;
    lse.kind = EstimatorKind::Lse;
    // the least-squares fit needs at least D_b points in the window
    std::vector<double> lse_cands;
    for (double h : cands)
      if (h * static_cast<double>(n) >= 2.0 * static_cast<double>(coefficient_count(d, cfg.b)))
        lse_cands.push_back(h);
    const OracleResult ol = oracle_bandwidth(lse, f, y, n, d, lse_cands, run);

    fit.risks.push_back(ob.risk);
    fit.ses.push_back(ob.ses[argmin_prefer_larger(ob.risks, ob.candidates)]);
    fit.oracle_h.push_back(ob.h_tilde);
    fit.baseline_risks.push_back(ol.risk);
    fit.baseline_ses.push_back(ol.ses[argmin_prefer_larger(ol.risks, ol.candidates)]);
    fit.baseline_h.push_back(ol.h_tilde);
  }
  std::vector<double> lx, ly, lb;
  for (std::size_t i = 0; i < cfg.ns.size(); ++i) {
    lx.push_back(std::log(static_cast<double>(cfg.ns[i])));
    ly.push_back(std::log(fit.risks[i]));
    lb.push_back(std::log(fit.baseline_risks[i]));
  }
  fit.slope = fit_line(lx, ly).slope;
  fit.baseline_slope = fit_line(lx, lb).slope;
  return fit;
}

std::vector<double> default_eps_grid()
{
  std::vector<double> eps;
  for (int i = 0; i <= 40; ++i)
    eps.push_back(0.25 * i);
  return eps;
}

TailCurve tail_decay_check(const TailConfig& cfg)
{
  if (cfg.run.reps < 2)
    throw Error(ErrorKind::InvalidArgument, "tail check needs reps >= 2");
  const std::vector<double> eps = cfg.eps.empty() ? default_eps_grid() : cfg.eps;
  if (!std::is_sorted(eps.begin(), eps.end()))
    throw Error(ErrorKind::InvalidArgument, "eps grid must be increasing");
  const int d = 1;
  const FunctionSpec f = test_function(cfg.function_id);
  EstimatorSpec spec = cfg.spec;
  spec.kind = EstimatorKind::Fixed;
  spec.h = cfg.h;
  const std::vector<double> y = point_of(cfg.y, d);
  if (!window_in_domain(y, cfg.h))
    throw Error(ErrorKind::WindowOutOfDomain, "tail window leaves [0,1]");
  const auto grid = std::make_shared<const DesignGrid>(make_grid(d, cfg.n));
  const double truth = f(y);
  const double scale = static_cast<double>(cfg.n) * std::pow(cfg.h, d);
  const std::uint64_t seed = cell_seed(cfg.run.master_seed, cfg.function_id, cfg.n);

  const auto stats = replicate<double>(cfg.run.backend, cfg.run.reps, cfg.run.workers, [&](std::size_t r) {
    const Sample s = simulate(f, grid, derive_seed(seed, r), cfg.run.noise);
    try {
      return scale * std::abs(run_estimator(spec, s, y) - truth);
    } catch (const Error& e) {
      if (is_validation_error(e.kind()))
        throw;
      return kNaN;
    }
  });

  TailCurve curve;
  curve.eps = eps;
  std::vector<double> ok;
  for (double s : stats) {
    if (std::isfinite(s))
      ok.push_back(s);
    else
      ++curve.failures;
  }
  check_failures(curve.failures, cfg.run.reps, "tail check");
  std::vector<double> fx, fy;
  for (double e : eps) {
    const auto above = std::count_if(ok.begin(), ok.end(), [&](double s) { return s >= e; });
    const double p = static_cast<double>(above) / static_cast<double>(ok.size());
    curve.prob.push_back(p);
    if (p >= kTailFitLow && p <= kTailFitHigh) {
      fx.push_back(e);
      fy.push_back(std::log(p));
    }
  }
  curve.fit_points = fx.size();
  if (fx.size() >= 2)
    curve.fit = fit_line(fx, fy);
  else
    curve.fit = {kNaN, kNaN, kNaN};
  return curve;
}

} // namespace mulreg
