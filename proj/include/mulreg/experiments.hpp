#pragma once

#include "mulreg/bayes.hpp"
#include "mulreg/lepski.hpp"
#include "mulreg/model.hpp"
#include "mulreg/parallel.hpp"

#include <array>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace mulreg {

//! Which estimator a Monte Carlo run evaluates.
//!  - fixed: Bayes estimate at bandwidth h on the plug-in set (or known A, M)
//!  - adaptive: the Lepski procedure
//!  - minimax: known-constants estimate at (L n)^(-1/(beta+d))
//!  - lse: local least squares (first coefficient of the fit to 2Y) at h
enum class EstimatorKind { Fixed, Adaptive, Minimax, Lse };

std::string to_string(EstimatorKind k);
EstimatorKind parse_estimator(const std::string& s);

struct EstimatorSpec {
  EstimatorKind kind = EstimatorKind::Adaptive;
  int b = 2;
  double h = 0.0;
  //! Use Theta(a_low, m_up) instead of the plug-in set (fixed, minimax).
  bool known_bounds = false;
  double a_low = 0.0;
  double m_up = 0.0;
  double beta = 2.0;
  double lipschitz = 1.0;
  IntegratorConfig integrator;
  ThresholdParams thresholds;
};

//! One estimate; h_used receives the bandwidth actually used.
double run_estimator(const EstimatorSpec& spec, const Sample& sample, std::span<const double> y,
                     double* h_used = nullptr);

//! Shared Monte Carlo knobs.
struct RunOptions {
  std::size_t reps = 1000;
  std::uint64_t master_seed = 0;
  int workers = 0;
  Backend backend = Backend::OpenMP;
  NoiseMode noise = NoiseMode::Uniform;
};

//! Per-rep failures above this fraction abort the run.
inline constexpr double kMaxFailureFraction = 0.10;

//! Mean and standard error sd / sqrt(count) of the finite entries.
struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
  std::size_t count = 0;
};

MeanSe mean_se(std::span<const double> v);

struct RiskReport {
  std::string function_id;
  std::string estimator;
  std::size_t n = 0;
  std::vector<double> y;
  std::size_t reps = 0;
  double risk = 0.0;
  double se = 0.0;
  std::size_t failures = 0;
  double mean_bandwidth = 0.0;
  std::map<double, std::size_t> bandwidth_histogram;
};

//! E|f_hat(y) - f(y)| over reps independent samples.
RiskReport mc_risk(const EstimatorSpec& spec, const FunctionSpec& f, std::span<const double> y, std::size_t n,
                   int d, const RunOptions& opts);

struct OracleResult {
  std::vector<double> candidates;
  std::vector<double> risks;
  std::vector<double> ses;
  double h_tilde = 0.0;
  double risk = 0.0;
  std::size_t failures = 0;
};

//! Candidate minimizing the risk, on samples shared across candidates; the
//! spec's kind must be fixed or lse, its h is overwritten. Ties go to the
//! larger h.
OracleResult oracle_bandwidth(const EstimatorSpec& spec, const FunctionSpec& f, std::span<const double> y,
                              std::size_t n, int d, std::span<const double> h_candidates, const RunOptions& opts);

//! Index of the smallest risk; equal risks resolve to the larger bandwidth.
std::size_t argmin_prefer_larger(std::span<const double> risks, std::span<const double> h);

//! Interior evaluation points (j - 1/2)/count whose window at h_max stays in
//! [0,1].
std::vector<double> evaluation_points(std::size_t count, double h_max);

//! Oracle candidates: the ladder plus geometric midpoints, decreasing.
std::vector<double> ladder_with_midpoints(const BandwidthGrid& grid);

struct TableConfig {
  std::vector<std::string> functions{"f1", "f2", "f3"};
  std::vector<std::size_t> ns{100, 1000};
  std::size_t points = 100;
  int b = 2;
  IntegratorConfig integrator;
  ThresholdParams thresholds;
  RunOptions run;
};

struct TableRow {
  std::string function_id;
  std::size_t n = 0;
  std::size_t points = 0;
  double adaptive_risk = 0.0;
  double adaptive_se = 0.0;
  double oracle_risk = 0.0;
  double oracle_se = 0.0;
  //! Mean over points of oracle risk / adaptive risk.
  double ratio = 0.0;
  double ratio_se = 0.0;
  double mean_h_hat = 0.0;
  std::size_t failures = 0;
  std::size_t fallbacks = 0;
  //! Per point: y, f(y), adaptive risk, oracle risk, oracle h.
  std::vector<std::array<double, 5>> per_point;
};

std::vector<TableRow> replicate_risk_table(const TableConfig& cfg);

struct F4Config {
  std::size_t n = 1000;
  double y = 0.5;
  double h_star = 0.125;
  int b = 2;
  IntegratorConfig integrator;
  ThresholdParams thresholds;
  RunOptions run;
};

struct F4Report {
  double parametric_risk = 0.0;
  double parametric_se = 0.0;
  double adaptive_risk = 0.0;
  double adaptive_se = 0.0;
  double mean_bandwidth = 0.0;
  std::map<double, std::size_t> bandwidth_histogram;
  std::size_t failures = 0;
  std::size_t reps = 0;
};

F4Report replicate_f4(const F4Config& cfg);

struct RateConfig {
  std::string function_id = "f1";
  double beta_nominal = 2.0;
  std::vector<std::size_t> ns{100, 400, 1600};
  double y = 0.3;
  int b = 2;
  IntegratorConfig integrator;
  RunOptions run;
};

struct RateFit {
  std::vector<std::size_t> ns;
  std::vector<double> risks;
  std::vector<double> ses;
  std::vector<double> oracle_h;
  std::vector<double> baseline_risks;
  std::vector<double> baseline_ses;
  std::vector<double> baseline_h;
  double slope = 0.0;
  double baseline_slope = 0.0;
  //! -beta/(beta+d) and -beta/(2 beta+d)
  double target = 0.0;
  double baseline_target = 0.0;
};

//! Candidate bandwidths 2^(-j/2) in [max(4/n, h_min), 1/2] with a window
//! inside [0,1].
std::vector<double> rate_candidates(std::size_t n, int b, double y);

RateFit rate_slope(const RateConfig& cfg);

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};

//! Ordinary least squares; throws InvalidArgument below two points.
LineFit fit_line(std::span<const double> x, std::span<const double> y);

struct TailConfig {
  std::string function_id = "constant(2)";
  std::size_t n = 400;
  double y = 0.5;
  double h = 0.25;
  std::vector<double> eps;
  EstimatorSpec spec;
  RunOptions run;
};

struct TailCurve {
  std::vector<double> eps;
  std::vector<double> prob;
  //! Fit of log P against eps over the points with P in [0.01, 0.5].
  LineFit fit;
  std::size_t fit_points = 0;
  std::size_t failures = 0;
};

inline constexpr double kTailFitLow = 0.01;
inline constexpr double kTailFitHigh = 0.5;

//! Empirical P(n h^d |f_hat - f| >= eps) over the grid.
TailCurve tail_decay_check(const TailConfig& cfg);

//! Default deviation grid 0, 0.25, ..., 10.
std::vector<double> default_eps_grid();

} // namespace mulreg
