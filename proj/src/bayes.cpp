#include "mulreg/bayes.hpp"

#include "mulreg/error.hpp"

#include <cmath>
#include <limits>

namespace mulreg {

namespace {

constexpr double kStepTolerance = 1e-8;
constexpr double kStallTolerance = 1e-6;
constexpr int kMaxIterations = 10000;

double distance(std::span<const double> a, std::span<const double> b)
{
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

} // namespace

double log_pseudo_likelihood(std::span<const double> t, const WindowData& win)
{
  double total = 0.0;
  for (std::size_t i = 0; i < win.count(); ++i) {
    const auto k = win.basis_row(i);
    double f = 0.0;
    for (std::size_t p = 0; p < t.size(); ++p)
      f += t[p] * k[p];
    if (!(f > 0.0) || win.obs[i] > f)
      return -std::numeric_limits<double>::infinity();
    total -= std::log(f);
  }
  return total;
}

double log_pseudo_likelihood(const PolyCoeffs& t, const WindowData& win)
{
  return log_pseudo_likelihood(std::span<const double>(t.values), win);
}

PolyCoeffs posterior_medians(const WindowData& win, const ParamSet& set, const IntegratorConfig& cfg)
{
  return {set.idx, integrate_posterior(win, set, cfg).medians()};
}

PosteriorEstimate minimize_criterion(const Posterior& post, const ParamSet& set)
{
  PosteriorEstimate est;
  est.report = post.report;
  std::vector<double> t = post.medians();
  if (!membership(t, set)) {
    est.constrained = true;
    const std::size_t dim = t.size();
    t = project_onto(t, set);
    double value = post.criterion(t);
    double alpha = std::max(value, 1e-12) / static_cast<double>(dim);
    std::vector<double> grad(dim);
    std::vector<double> trial(dim);
    double step = std::numeric_limits<double>::infinity();
    int it = 0;
    for (; it < kMaxIterations; ++it) {
      for (std::size_t p = 0; p < dim; ++p)
        grad[p] = post.marginals[p].slope(t[p]);
      for (std::size_t p = 0; p < dim; ++p)
        trial[p] = t[p] - alpha * grad[p];
      const auto cand = project_onto(trial, set);
      step = distance(cand, t);
      if (step < kStepTolerance)
        break;
      const double cv = post.criterion(cand);
      if (cv < value) {
        t = cand;
        value = cv;
        alpha *= 1.5;
      } else {
        alpha *= 0.5;
      }
    }
    est.iterations = it;
    if (it == kMaxIterations && step > kStallTolerance)
      throw Error(ErrorKind::NonConvergence, "projected descent hit the iteration cap");
  }
  est.theta_hat = {set.idx, std::move(t)};
  est.f_hat = est.theta_hat.values[0];
  return est;
}

PosteriorEstimate bayes_estimate(const WindowData& win, const ParamSet& set, const IntegratorConfig& cfg)
{
  return minimize_criterion(integrate_posterior(win, set, cfg), set);
}

double minimax_bandwidth(double beta, double lipschitz, std::size_t n, int d)
{
  if (!(beta > 0.0) || !(lipschitz > 0.0) || n == 0 || d < 1)
    throw Error(ErrorKind::InvalidArgument, "minimax bandwidth needs beta > 0, L > 0, n >= 1, d >= 1");
  return std::pow(lipschitz * static_cast<double>(n), -1.0 / (beta + d));
}

PosteriorEstimate minimax_estimate(const Sample& sample, std::span<const double> y, double beta, double lipschitz,
                                   double a_low, double m_up, int b, const IntegratorConfig& cfg)
{
  const double h = minimax_bandwidth(beta, lipschitz, sample.size(), sample.grid->dim());
  const auto idx = multi_indices(sample.grid->dim(), b);
  const ParamSet set(a_low, m_up, idx);
  return bayes_estimate(window(sample, y, h, idx), set, cfg);
}

} // namespace mulreg
