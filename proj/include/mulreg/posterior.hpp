#pragma once

#include "mulreg/distribution.hpp"
#include "mulreg/local_poly.hpp"
#include "mulreg/param_set.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace mulreg {

//! How the posterior proportional to L_h(u) du on Theta is integrated.
//!
//! Both backends integrate the intercept u_0 exactly per column: for fixed
//! higher-order coefficients the likelihood is prod_i 1/(u_0 + g_i) on an
//! interval, tabulated with a log-spaced rule. They differ in how the
//! remaining D_b - 1 coordinates are covered: a tensor grid whose axes are
//! refined to the marginal quantiles (Grid), or uniform proposals over a box
//! shrunk around the likelihood support (Sample).
struct IntegratorConfig {
  enum class Method { Auto, Grid, Sample };

  Method method = Method::Auto;
  int nodes_per_axis = 64;
  std::size_t proposal_count = 200000;
  std::uint64_t seed = 0;

  //! Auto picks Grid for D_b <= 3 and Sample above.
  Method resolve(std::size_t coeff_count) const;
};

std::string to_string(IntegratorConfig::Method m);
IntegratorConfig::Method parse_method(const std::string& s);

struct IntegratorReport {
  std::string method;
  std::size_t node_count = 0;
  //! Effective sample size (Sample) or the number of cells holding mass (Grid).
  double effective_sample_size = 0.0;
  //! Smallest and largest cell width over the refined axes (Grid only).
  double min_spacing = 0.0;
  double max_spacing = 0.0;
  //! Fraction of nodes/proposals with positive likelihood.
  double support_fraction = 0.0;
};

//! Normalized posterior through its coordinate marginals.
struct Posterior {
  std::vector<Marginal> marginals;
  IntegratorReport report;

  std::vector<double> medians() const;
  //! sum_p E|t_p - u_p|, the separable form of the L1 Bayes criterion.
  double criterion(std::span<const double> t) const;
};

//! Throws EmptyPosteriorSupport when no node has positive likelihood.
Posterior integrate_posterior(const WindowData& win, const ParamSet& set, const IntegratorConfig& cfg);

} // namespace mulreg
