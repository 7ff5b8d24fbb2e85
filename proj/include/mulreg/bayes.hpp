#pragma once

#include "mulreg/local_poly.hpp"
#include "mulreg/param_set.hpp"
#include "mulreg/posterior.hpp"

#include <span>

namespace mulreg {

//! sum_i -log f_t(X_i) over the window, or -inf when some Y_i > f_t(X_i) or
//! f_t(X_i) <= 0.
double log_pseudo_likelihood(std::span<const double> t, const WindowData& win);
double log_pseudo_likelihood(const PolyCoeffs& t, const WindowData& win);

//! Coordinate-wise (lower) medians of the posterior on Theta.
PolyCoeffs posterior_medians(const WindowData& win, const ParamSet& set, const IntegratorConfig& cfg);

struct PosteriorEstimate {
  PolyCoeffs theta_hat;
  double f_hat = 0.0;
  IntegratorReport report;
  //! True when the median vector left Theta and descent was needed.
  bool constrained = false;
  int iterations = 0;
};

//! argmin over Theta of the L1 Bayes criterion.
PosteriorEstimate bayes_estimate(const WindowData& win, const ParamSet& set, const IntegratorConfig& cfg);

//! Minimizes the criterion of an already integrated posterior over Theta.
PosteriorEstimate minimize_criterion(const Posterior& post, const ParamSet& set);

//! (L n)^(-1/(beta + d))
double minimax_bandwidth(double beta, double lipschitz, std::size_t n, int d);

//! Window at the minimax bandwidth with the known set Theta(A, M).
PosteriorEstimate minimax_estimate(const Sample& sample, std::span<const double> y, double beta, double lipschitz,
                                   double a_low, double m_up, int b, const IntegratorConfig& cfg);

} // namespace mulreg
