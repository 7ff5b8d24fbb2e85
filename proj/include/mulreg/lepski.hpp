#pragma once

#include "mulreg/bayes.hpp"
#include "mulreg/local_poly.hpp"
#include "mulreg/param_set.hpp"

#include <span>
#include <string>
#include <vector>

namespace mulreg {

//! Dyadic ladder h_k = 2^-k h_max, k = 0..k_n, with h_{k_n} >= h_min.
struct BandwidthGrid {
  double h_max = 0.0;
  double h_min = 0.0;
  std::vector<double> h;

  int last() const { return static_cast<int>(h.size()) - 1; }
};

//! h_max = n^(-1/(b+d)), h_min = (ln n)^(b/(d(b+d))) n^(-1/d). Throws
//! DegenerateGrid when fewer than two scales fit.
BandwidthGrid bandwidth_grid(std::size_t n, int b, int d);

enum class ThresholdMode { Theory, Practical };

std::string to_string(ThresholdMode m);
ThresholdMode parse_threshold_mode(const std::string& s);

inline constexpr double kDefaultThresholdConstant = 2.0;

//! 432 D_b^3 (32 q d + 16)
double theory_constant(std::size_t coeff_count, double q, int d);

struct ThresholdParams {
  ThresholdMode mode = ThresholdMode::Practical;
  double c_thr = kDefaultThresholdConstant;
  double q = 1.0;
};

//! S_n(l) = C lambda^-1 (1 + l ln 2) / (n h_l^d); +inf when lambda vanishes.
double threshold(int l, std::size_t n, int d, double h_l, double lambda_l, std::size_t coeff_count,
                 const ThresholdParams& params);

//! Theta(A-hat / 2, 4 M-hat). Throws InvalidBounds when A-hat <= 0.
ParamSet random_param_set(double a_hat, double m_hat, IndexSetPtr idx);

//! Smallest k with |f_k - f_l| <= m_hat * S_l for all l > k. k_n passes
//! vacuously, so an empty pass set cannot occur.
int select_index(std::span<const double> estimates, std::span<const double> thresholds, double m_hat);

struct ScaleEstimate {
  int k = 0;
  double h = 0.0;
  double f_hat = 0.0;
  double lambda = 0.0;
  double s_n = 0.0;
  std::size_t window_count = 0;
  //! The posterior had no support and f_hat is the window maximum.
  bool fallback = false;
};

struct Comparison {
  int k = 0;
  int l = 0;
  double difference = 0.0;
  double bound = 0.0;
  bool pass = false;
};

struct SelectionTrace {
  std::vector<ScaleEstimate> estimates;
  //! Every pair k < l, in (k, l) order.
  std::vector<Comparison> comparisons;
  int k_hat = 0;
  double a_hat = 0.0;
  double m_hat = 0.0;
  ThresholdParams params;

  double f_hat() const { return estimates[static_cast<std::size_t>(k_hat)].f_hat; }
  double h_hat() const { return estimates[static_cast<std::size_t>(k_hat)].h; }
};

//! Builds the comparison table and k_hat from per-scale estimates.
SelectionTrace assemble_trace(std::vector<ScaleEstimate> estimates, double a_hat, double m_hat,
                              const ThresholdParams& params);

//! Replays the selection rule against the recorded comparisons.
bool trace_consistent(const SelectionTrace& trace);

//! Preliminary fit at h_max: bounds and the random set.
struct PlugIn {
  PlugInBounds bounds;
  ParamSet set;
};

PlugIn plug_in(const Sample& sample, std::span<const double> y, double h_max, IndexSetPtr idx);

//! Bayes estimate at one scale, replacing an empty posterior by max Y.
ScaleEstimate scale_estimate(const Sample& sample, std::span<const double> y, int k, double h,
                             const ParamSet& set, const IntegratorConfig& cfg, const ThresholdParams& params);

struct AdaptiveResult {
  double f_hat = 0.0;
  SelectionTrace trace;
};

AdaptiveResult adaptive_estimate(const Sample& sample, std::span<const double> y, int b,
                                 const IntegratorConfig& cfg, const ThresholdParams& params);

} // namespace mulreg
