#include "mulreg/posterior.hpp"

#include "mulreg/error.hpp"
#include "mulreg/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace mulreg {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

//! Tabulated conditional law of the intercept in one column:
//! u_0 = lo + scale * expm1(v), density in v given at v = j * step.
struct ColumnTable {
  double lo = 0.0;
  double scale = 0.0;
  double step = 0.0;
  double* density = nullptr;
};

//! Conditional law of the intercept given the other coefficients.
//!
//! With g_i = sum_{p != 0} u_p K_p(z_i) the likelihood in u_0 is
//! prod_i 1/(u_0 + g_i) on [lo, hi], where lo enforces Y_i <= f_u(X_i) and
//! the lower Theta constraint and hi the upper one. Substituting
//! u_0 = lo + s u with s = 1/sum_i 1/(lo + g_i) gives
//! phi(lo) prod_i (1 + u x_i)^-1, x_i = s/(lo + g_i), which is integrated on
//! a uniform grid in v = log(1 + u).
class ColumnKernel {
public:
  ColumnKernel(const WindowData& win, const ParamSet& set)
    : n_(win.count())
    , rest_(win.coeffs() - 1)
    , a_(set.a_low)
    , m_(set.m_up)
    , obs_(win.obs)
    , basis_(n_ * rest_)
    , g_(n_)
    , x_(n_)
  {
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t q = 0; q < rest_; ++q)
        basis_[i * rest_ + q] = win.basis_row(i)[q + 1];
  }

  std::size_t rest_dim() const { return rest_; }

  //! Log of the integral of the likelihood over the intercept at fixed rest
  //! coefficients, using k nodes in v. The table, when given, receives the
  //! node densities.
  double evaluate(const double* rest, int k, ColumnTable* table, double* lo_grad = nullptr)
  {
    double r = 0.0;
    for (std::size_t q = 0; q < rest_; ++q)
      r += std::abs(rest[q]);
    double lo = a_ + r;
    std::size_t active = n_;
    for (std::size_t i = 0; i < n_; ++i) {
      double g = 0.0;
      const double* b = basis_.data() + i * rest_;
      for (std::size_t q = 0; q < rest_; ++q)
        g += rest[q] * b[q];
      g_[i] = g;
      if (obs_[i] - g > lo) {
        lo = obs_[i] - g;
        active = i;
      }
    }
    if (lo_grad) {
      for (std::size_t q = 0; q < rest_; ++q)
        lo_grad[q] = active < n_ ? -basis_[active * rest_ + q] : (rest[q] < 0.0 ? -1.0 : 1.0);
    }
    const double hi = m_ - r;
    if (!(hi > lo))
      return kNegInf;

    double log_phi = 0.0;
    double chunk = 1.0;
    double inv_sum = 0.0;
    for (std::size_t i = 0; i < n_; ++i) {
      const double c = lo + g_[i];
      if (!(c > 0.0))
        return kNegInf;
      x_[i] = c;
      inv_sum += 1.0 / c;
      chunk *= c;
      if ((i & 15u) == 15u) {
        log_phi -= std::log(chunk);
        chunk = 1.0;
      }
    }
    log_phi -= std::log(chunk);
    const double s = 1.0 / inv_sum;
    for (std::size_t i = 0; i < n_; ++i)
      x_[i] = s / x_[i];

    // truncate where the integrand is negligible, or at hi
    const double span_u = (hi - lo) / s;
    double u_top = span_u;
    for (double u = 1.0; u < span_u; u *= 2.0) {
      if (weighted_psi(u) < 1e-17) {
        u_top = u;
        break;
      }
    }
    const double dv = std::log1p(u_top) / (k - 1);
    double prev = 1.0; // integrand at v = 0
    double acc = 0.0;
    if (table) {
      table->lo = lo;
      table->scale = s;
      table->step = dv;
      table->density[0] = 1.0;
    }
    const double ratio = std::exp(dv);
    double grow = 1.0;
    for (int j = 1; j < k; ++j) {
      grow *= ratio;
      const double q = weighted_psi(grow - 1.0);
      acc += 0.5 * (prev + q) * dv;
      prev = q;
      if (table)
        table->density[j] = q;
    }
    if (!(acc > 0.0))
      return kNegInf;
    return log_phi + std::log(s) + std::log(acc);
  }

private:
  //! (1 + u) prod_i (1 + u x_i)^-1: the integrand in v = log(1 + u).
  double weighted_psi(double u) const
  {
    // four independent chains; the product is latency bound otherwise
    double p0 = 1.0, p1 = 1.0, p2 = 1.0, p3 = 1.0;
    std::size_t i = 0;
    for (; i + 4 <= n_; i += 4) {
      p0 *= 1.0 + u * x_[i];
      p1 *= 1.0 + u * x_[i + 1];
      p2 *= 1.0 + u * x_[i + 2];
      p3 *= 1.0 + u * x_[i + 3];
    }
    for (; i < n_; ++i)
      p0 *= 1.0 + u * x_[i];
    return (1.0 + u) / ((p0 * p1) * (p2 * p3));
  }

  std::size_t n_;
  std::size_t rest_;
  double a_;
  double m_;
  const std::vector<double>& obs_;
  std::vector<double> basis_;
  std::vector<double> g_;
  std::vector<double> x_;
};

//! Inverse CDF of a column table, with the density linear in v between nodes.
double draw_intercept(const ColumnTable& t, int k, double p)
{
  std::vector<double> cum(static_cast<std::size_t>(k), 0.0);
  for (int j = 1; j < k; ++j)
    cum[j] = cum[j - 1] + 0.5 * (t.density[j - 1] + t.density[j]) * t.step;
  const double target = p * cum[k - 1];
  int j = static_cast<int>(std::upper_bound(cum.begin(), cum.end(), target) - cum.begin()) - 1;
  j = std::clamp(j, 0, k - 2);
  // solve cum_j + q_j w + (q_{j+1} - q_j) w^2 / (2 step) = target for w
  const double a = (t.density[j + 1] - t.density[j]) / (2.0 * t.step);
  const double b = t.density[j];
  const double c = cum[j] - target;
  double w;
  if (std::abs(a) * t.step < 1e-12 * std::max(b, 1e-300))
    w = b > 0.0 ? -c / b : 0.0;
  else
    w = (-b + std::sqrt(std::max(0.0, b * b - 4.0 * a * c))) / (2.0 * a);
  w = std::clamp(w, 0.0, t.step);
  return t.lo + t.scale * std::expm1(t.step * j + w);
}

constexpr int kInitialNodes = 16;
constexpr double kInnerScale = 1e-4;
constexpr int kMaxInitialNodes = 256;
constexpr int kCoarseNodes = 8;
constexpr int kCoarseKnots = 8;
constexpr int kMaxRefinements = 40;
//! Refinement stops once every coarse cell holds its target mass to within
//! kSettleMass, or once no axis end moves by more than kSettleRange of the
//! axis width (the coarse grid cannot resolve the core any further; the final
//! pass does).
constexpr double kSettleMass = 0.05;
constexpr double kSettleRange = 0.01;
//! Axis edges sit at marginal quantiles of equally spaced standard normal
//! levels in [-kLevelSpan, kLevelSpan]; the tails beyond carry ~6e-8 mass.
constexpr double kLevelSpan = 5.3;

double normal_cdf(double z)
{
  return 0.5 * std::erfc(-z / std::sqrt(2.0));
}

double level(std::size_t j, std::size_t nodes)
{
  return normal_cdf(-kLevelSpan + 2.0 * kLevelSpan * static_cast<double>(j) / static_cast<double>(nodes));
}

//! Target mass of cell j when the edges sit at the normal levels.
double level_mass(std::size_t j, std::size_t nodes)
{
  return level(j + 1, nodes) - level(j, nodes);
}

//! Tensor grid over the rest coordinates described by per-axis edges.
struct GridPass {
  std::vector<std::vector<double>> edges;
  std::vector<double> log_mass; // per cell, includes log cell volume
  std::size_t cells = 0;
  // column tables, final pass only
  std::vector<double> lo;
  std::vector<double> scale;
  std::vector<double> step;
  std::vector<double> density;
  std::vector<double> widths;
};

void run_grid(ColumnKernel& kernel, GridPass& pass, int k, bool keep_tables)
{
  const std::size_t rdim = pass.edges.size();
  std::vector<std::size_t> sizes(rdim);
  pass.cells = 1;
  for (std::size_t a = 0; a < rdim; ++a) {
    sizes[a] = pass.edges[a].size() - 1;
    pass.cells *= sizes[a];
  }
  pass.log_mass.assign(pass.cells, kNegInf);
  if (keep_tables) {
    pass.lo.assign(pass.cells, 0.0);
    pass.scale.assign(pass.cells, 1.0);
    pass.step.assign(pass.cells, 1.0);
    pass.density.assign(pass.cells * static_cast<std::size_t>(k), 0.0);
    pass.widths.assign(pass.cells, 0.0);
  }
  std::vector<double> grad(pass.edges.size());
  std::vector<std::size_t> digit(rdim, 0);
  std::vector<double> mid(rdim);
  for (std::size_t cell = 0; cell < pass.cells; ++cell) {
    double log_vol = 0.0;
    for (std::size_t a = 0; a < rdim; ++a) {
      const double lo = pass.edges[a][digit[a]];
      const double hi = pass.edges[a][digit[a] + 1];
      mid[a] = 0.5 * (lo + hi);
      log_vol += hi > lo ? std::log(hi - lo) : kNegInf;
    }
    if (log_vol > kNegInf) {
      ColumnTable table;
      if (keep_tables)
        table.density = pass.density.data() + cell * static_cast<std::size_t>(k);
      const double lm = kernel.evaluate(mid.data(), k, keep_tables ? &table : nullptr, grad.data());
      pass.log_mass[cell] = lm + log_vol;
      if (keep_tables) {
        pass.lo[cell] = table.lo;
        pass.scale[cell] = table.scale;
        pass.step[cell] = table.step;
        double var = 0.0;
        for (std::size_t a = 0; a < rdim; ++a) {
          const double w = grad[a] * (pass.edges[a][digit[a] + 1] - pass.edges[a][digit[a]]);
          var += w * w;
        }
        pass.widths[cell] = std::sqrt(var);
      }
    }
    // last axis fastest
    for (std::size_t a = rdim; a-- > 0;) {
      if (++digit[a] < sizes[a])
        break;
      digit[a] = 0;
    }
  }
}

//! Cell weights relative to the heaviest cell and per-axis marginal masses.
std::vector<std::vector<double>> axis_masses(const GridPass& pass, std::vector<double>& weights)
{
  const std::size_t rdim = pass.edges.size();
  const double top = *std::max_element(pass.log_mass.begin(), pass.log_mass.end());
  weights.resize(pass.cells);
  for (std::size_t c = 0; c < pass.cells; ++c)
    weights[c] = pass.log_mass[c] > kNegInf ? std::exp(pass.log_mass[c] - top) : 0.0;

  std::vector<std::vector<double>> out(rdim);
  std::vector<std::size_t> sizes(rdim);
  for (std::size_t a = 0; a < rdim; ++a) {
    sizes[a] = pass.edges[a].size() - 1;
    out[a].assign(sizes[a], 0.0);
  }
  std::vector<std::size_t> digit(rdim, 0);
  for (std::size_t c = 0; c < pass.cells; ++c) {
    for (std::size_t a = 0; a < rdim; ++a)
      out[a][digit[a]] += weights[c];
    for (std::size_t a = rdim; a-- > 0;) {
      if (++digit[a] < sizes[a])
        break;
      digit[a] = 0;
    }
  }
  return out;
}

//! Edges at the normal levels of the histogram, padded slightly and kept
//! inside Theta's hull.
std::vector<double> refined_edges(const std::vector<double>& edges, const std::vector<double>& mass, int nodes,
                                  double radius)
{
  const PiecewiseMixture h = histogram(edges, mass);
  std::vector<double> out(static_cast<std::size_t>(nodes) + 1);
  for (std::size_t j = 0; j < out.size(); ++j)
    out[j] = h.quantile(level(j, static_cast<std::size_t>(nodes)));
  const double pad = 0.02 * (out.back() - out.front());
  out.front() = std::max(-radius, out.front() - pad);
  out.back() = std::min(radius, out.back() + pad);
  for (std::size_t j = 1; j < out.size(); ++j)
    out[j] = std::max(out[j], out[j - 1]);
  return out;
}

bool range_stable(const std::vector<std::vector<double>>& before, const std::vector<std::vector<double>>& after)
{
  for (std::size_t a = 0; a < before.size(); ++a) {
    const double width = after[a].back() - after[a].front();
    if (std::abs(after[a].front() - before[a].front()) > kSettleRange * width
        || std::abs(after[a].back() - before[a].back()) > kSettleRange * width)
      return false;
  }
  return true;
}

bool settled(const std::vector<std::vector<double>>& marg)
{
  for (const auto& m : marg) {
    const double total = std::accumulate(m.begin(), m.end(), 0.0);
    for (std::size_t j = 0; j < m.size(); ++j)
      if (std::abs(m[j] / total - level_mass(j, m.size())) > kSettleMass)
        return false;
  }
  return true;
}

//! Symmetric edges on [-radius, radius], geometric away from 0 so that one
//! pass resolves scales from radius down to radius * kInnerScale. The
//! higher-order coefficients sit far inside the hull of Theta whenever the
//! plug-in bounds carry large derivative terms.
std::vector<double> initial_edges(double radius, int nodes)
{
  const int half = nodes / 2;
  const double ratio = std::pow(kInnerScale, 1.0 / (half - 1));
  std::vector<double> e(static_cast<std::size_t>(2 * half) + 1);
  double v = radius;
  for (int j = 0; j < half; ++j) {
    e[static_cast<std::size_t>(2 * half - j)] = v;
    e[static_cast<std::size_t>(j)] = -v;
    v *= ratio;
  }
  e[static_cast<std::size_t>(half)] = 0.0;
  return e;
}

Posterior single_column(ColumnKernel& kernel, int k, const std::string& method)
{
  std::vector<double> density(static_cast<std::size_t>(k));
  ColumnTable table;
  table.density = density.data();
  const double lm = kernel.evaluate(nullptr, k, &table);
  if (!(lm > kNegInf))
    throw Error(ErrorKind::EmptyPosteriorSupport, "the window data exclude every intercept in the parameter set");
  Posterior post;
  post.marginals.emplace_back(
    ColumnMixture(static_cast<std::size_t>(k), {table.lo}, {table.scale}, {table.step}, density, {1.0}));
  post.report.method = method;
  post.report.node_count = static_cast<std::size_t>(k);
  post.report.effective_sample_size = 1.0;
  post.report.support_fraction = 1.0;
  return post;
}

Posterior grid_posterior(ColumnKernel& kernel, const ParamSet& set, int nodes)
{
  const std::size_t rdim = kernel.rest_dim();
  const double radius = set.rest_radius();

  GridPass pass;
  int initial = kInitialNodes;
  pass.edges.assign(rdim, initial_edges(radius, initial));
  std::vector<double> weights;
  bool final_pass = false;
  for (int step = 0;; ++step) {
    run_grid(kernel, pass, final_pass ? nodes : kCoarseKnots, final_pass);
    const bool any = std::any_of(pass.log_mass.begin(), pass.log_mass.end(), [](double v) { return v > kNegInf; });
    if (!any) {
      if (step == 0 && initial < kMaxInitialNodes) {
        initial *= 2;
        pass.edges.assign(rdim, initial_edges(radius, initial));
        step = -1;
        continue;
      }
      throw Error(ErrorKind::EmptyPosteriorSupport, "no grid node carries likelihood mass");
    }
    if (final_pass)
      break;
    // refine until every axis marginal puts the intended mass in each cell
    const auto marg = axis_masses(pass, weights);
    std::vector<std::vector<double>> next(rdim);
    for (std::size_t a = 0; a < rdim; ++a)
      next[a] = refined_edges(pass.edges[a], marg[a], kCoarseNodes, radius);
    final_pass = (step > 0 && (settled(marg) || range_stable(pass.edges, next))) || step + 1 >= kMaxRefinements;
    if (final_pass) {
      for (std::size_t a = 0; a < rdim; ++a)
        next[a] = refined_edges(pass.edges[a], marg[a], nodes, radius);
    }
    pass.edges = std::move(next);
  }

  const auto marg = axis_masses(pass, weights);
  Posterior post;
  post.marginals.reserve(rdim + 1);
  post.marginals.emplace_back(
    ColumnMixture(static_cast<std::size_t>(nodes), pass.lo, pass.scale, pass.step, pass.density, weights, pass.widths));
  for (std::size_t a = 0; a < rdim; ++a)
    post.marginals.emplace_back(histogram(pass.edges[a], marg[a]));

  auto& rep = post.report;
  rep.method = "grid";
  rep.node_count = pass.cells * static_cast<std::size_t>(nodes);
  std::size_t finite = 0;
  std::size_t massive = 0;
  for (std::size_t c = 0; c < pass.cells; ++c) {
    finite += pass.log_mass[c] > kNegInf;
    massive += weights[c] > 1e-12;
  }
  rep.support_fraction = static_cast<double>(finite) / static_cast<double>(pass.cells);
  rep.effective_sample_size = static_cast<double>(massive);
  rep.min_spacing = std::numeric_limits<double>::infinity();
  rep.max_spacing = 0.0;
  for (const auto& e : pass.edges) {
    for (std::size_t j = 1; j < e.size(); ++j) {
      rep.min_spacing = std::min(rep.min_spacing, e[j] - e[j - 1]);
      rep.max_spacing = std::max(rep.max_spacing, e[j] - e[j - 1]);
    }
  }
  return post;
}

constexpr std::size_t kPilotProposals = 4000;
constexpr int kPilotStages = 5;
constexpr int kSampleKnots = 16;

Posterior sample_posterior(ColumnKernel& kernel, const ParamSet& set, const IntegratorConfig& cfg)
{
  const std::size_t rdim = kernel.rest_dim();
  const double radius = set.rest_radius();
  std::vector<double> lo(rdim, -radius);
  std::vector<double> hi(rdim, radius);
  std::vector<double> t(rdim);

  auto draw = [&](UniformStream& rng) {
    for (std::size_t a = 0; a < rdim; ++a)
      t[a] = lo[a] + (hi[a] - lo[a]) * rng.next_double();
  };

  // pilot stages shrink the proposal box to the weighted support
  for (int stage = 0; stage < kPilotStages; ++stage) {
    UniformStream rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(stage)));
    std::vector<double> pts;
    std::vector<double> lw;
    pts.reserve(kPilotProposals * rdim);
    lw.reserve(kPilotProposals);
    for (std::size_t j = 0; j < kPilotProposals; ++j) {
      draw(rng);
      const double lm = kernel.evaluate(t.data(), kCoarseKnots, nullptr);
      if (lm > kNegInf) {
        pts.insert(pts.end(), t.begin(), t.end());
        lw.push_back(lm);
      }
    }
    if (lw.empty())
      continue;
    const double top = *std::max_element(lw.begin(), lw.end());
    std::vector<double> w(lw.size());
    for (std::size_t j = 0; j < lw.size(); ++j)
      w[j] = std::exp(lw[j] - top);
    const double spacing = std::pow(static_cast<double>(kPilotProposals), -1.0 / static_cast<double>(rdim));
    for (std::size_t a = 0; a < rdim; ++a) {
      std::vector<double> v(lw.size());
      for (std::size_t j = 0; j < lw.size(); ++j)
        v[j] = pts[j * rdim + a];
      const WeightedAtoms atoms(v, w);
      const double qlo = atoms.quantile(1e-6);
      const double qhi = atoms.quantile(1.0 - 1e-6);
      const double margin = std::max(0.25 * (qhi - qlo), spacing * (hi[a] - lo[a]));
      const double nlo = std::max(lo[a], qlo - margin);
      const double nhi = std::min(hi[a], qhi + margin);
      lo[a] = nlo;
      hi[a] = nhi;
    }
  }

  UniformStream rng(derive_seed(cfg.seed, 0xF1A1ull));
  const std::size_t count = std::max<std::size_t>(cfg.proposal_count, 100);
  std::vector<std::vector<double>> coords(rdim + 1);
  std::vector<double> lw;
  for (auto& c : coords)
    c.reserve(count);
  lw.reserve(count);
  std::vector<double> density(kSampleKnots);
  ColumnTable table;
  table.density = density.data();
  for (std::size_t j = 0; j < count; ++j) {
    draw(rng);
    const double p = rng.next_double();
    const double lm = kernel.evaluate(t.data(), kSampleKnots, &table);
    if (!(lm > kNegInf))
      continue;
    coords[0].push_back(draw_intercept(table, kSampleKnots, p));
    for (std::size_t a = 0; a < rdim; ++a)
      coords[a + 1].push_back(t[a]);
    lw.push_back(lm);
  }
  if (lw.empty())
    throw Error(ErrorKind::EmptyPosteriorSupport, "no proposal carries likelihood mass");

  const double top = *std::max_element(lw.begin(), lw.end());
  std::vector<double> w(lw.size());
  double sw = 0.0;
  double sw2 = 0.0;
  for (std::size_t j = 0; j < lw.size(); ++j) {
    w[j] = std::exp(lw[j] - top);
    sw += w[j];
    sw2 += w[j] * w[j];
  }
  Posterior post;
  for (std::size_t a = 0; a <= rdim; ++a)
    post.marginals.emplace_back(WeightedAtoms(coords[a], w));
  post.report.method = "sample";
  post.report.node_count = count;
  post.report.support_fraction = static_cast<double>(lw.size()) / static_cast<double>(count);
  post.report.effective_sample_size = sw * sw / sw2;
  return post;
}

} // namespace

IntegratorConfig::Method IntegratorConfig::resolve(std::size_t coeff_count) const
{
  if (method != Method::Auto)
    return method;
  return coeff_count <= 3 ? Method::Grid : Method::Sample;
}

std::string to_string(IntegratorConfig::Method m)
{
  switch (m) {
  case IntegratorConfig::Method::Auto: return "auto";
  case IntegratorConfig::Method::Grid: return "grid";
  case IntegratorConfig::Method::Sample: return "sample";
  }
  return "auto";
}

IntegratorConfig::Method parse_method(const std::string& s)
{
  if (s == "auto")
    return IntegratorConfig::Method::Auto;
  if (s == "grid")
    return IntegratorConfig::Method::Grid;
  if (s == "sample")
    return IntegratorConfig::Method::Sample;
  throw Error(ErrorKind::InvalidArgument, "integrator method must be grid, sample or auto, got '" + s + "'");
}

std::vector<double> Posterior::medians() const
{
  std::vector<double> m(marginals.size());
  for (std::size_t p = 0; p < marginals.size(); ++p)
    m[p] = marginals[p].median();
  return m;
}

double Posterior::criterion(std::span<const double> t) const
{
  double s = 0.0;
  for (std::size_t p = 0; p < marginals.size(); ++p)
    s += marginals[p].abs_dev(t[p]);
  return s;
}

Posterior integrate_posterior(const WindowData& win, const ParamSet& set, const IntegratorConfig& cfg)
{
  if (win.coeffs() != set.dim())
    throw Error(ErrorKind::InvalidArgument, "parameter set and window use different index sets");
  if (cfg.nodes_per_axis < 4)
    throw Error(ErrorKind::InvalidArgument, "integrator needs at least 4 nodes per axis");
  ColumnKernel kernel(win, set);
  const auto method = cfg.resolve(set.dim());
  if (kernel.rest_dim() == 0)
    return single_column(kernel, cfg.nodes_per_axis, to_string(method));
  if (method == IntegratorConfig::Method::Grid) {
    if (kernel.rest_dim() > 3)
      throw Error(ErrorKind::InvalidArgument, "grid integration supports at most 4 coefficients; use sample");
    return grid_posterior(kernel, set, cfg.nodes_per_axis);
  }
  return sample_posterior(kernel, set, cfg);
}

} // namespace mulreg
