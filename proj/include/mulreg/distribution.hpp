#pragma once

#include <cstddef>
#include <span>
#include <variant>
#include <vector>

namespace mulreg {

//! Weighted mixture of distributions with piecewise-linear CDFs sharing a
//! knot count. A single component is a histogram; many components hold the
//! conditional laws of the intercept across integration columns.
class PiecewiseMixture {
public:
  PiecewiseMixture() = default;
  PiecewiseMixture(std::size_t knots_per_component, std::vector<double> knots, std::vector<double> cdf,
                   std::vector<double> weights);

  std::size_t components() const { return w_.size(); }
  double cdf(double s) const;
  //! E|s - U|
  double abs_dev(double s) const;
  double mean() const;
  //! Smallest s with cdf(s) >= 1/2.
  double median() const;
  double lower() const { return lo_; }
  double upper() const { return hi_; }
  //! Smallest s with cdf(s) >= p.
  double quantile(double p) const;

private:
  double component_cdf(std::size_t c, double s) const;
  double component_integral(std::size_t c, double s) const;

  std::size_t k_ = 0;
  std::vector<double> x_;
  std::vector<double> f_;
  std::vector<double> int_f_;
  std::vector<double> w_;
  double lo_ = 0.0;
  double hi_ = 0.0;
};

//! Discrete law with weighted atoms.
class WeightedAtoms {
public:
  WeightedAtoms() = default;
  WeightedAtoms(std::vector<double> values, std::vector<double> weights);

  double cdf(double s) const;        // P(U <= s)
  double prob_below(double s) const; // P(U < s)
  double abs_dev(double s) const;
  double mean() const { return total_wv_; }
  double median() const;
  double lower() const { return v_.empty() ? 0.0 : v_.front(); }
  double upper() const { return v_.empty() ? 0.0 : v_.back(); }
  double quantile(double p) const;
  std::size_t size() const { return v_.size(); }

private:
  std::vector<double> v_;
  std::vector<double> cum_w_;
  std::vector<double> cum_wv_;
  double total_wv_ = 0.0;
};

//! Mixture of intercept laws, one per integration column. Component c lives
//! on t = lo_c + scale_c * expm1(v) with v on a uniform grid of K nodes and
//! step_c; its density in v is tabulated there and interpolated linearly, so
//! the CDF is quadratic in v between nodes.
class ColumnMixture {
public:
  ColumnMixture() = default;
  //! density holds K unnormalized values per component.
  ColumnMixture(std::size_t knots, std::vector<double> lo, std::vector<double> scale, std::vector<double> step,
                std::vector<double> density, std::vector<double> weights, std::vector<double> widths = {});

  std::size_t components() const { return comp_.size(); }
  double cdf(double s) const;
  double abs_dev(double s) const;
  double mean() const;
  double median() const;
  double quantile(double p) const;
  double lower() const { return lo_; }
  double upper() const { return hi_; }

private:
  struct Component {
    double lo;
    double scale;
    double step;
    double weight;
    double end;       // upper end of the support
    double int_end;   // integral of the CDF over [lo, end]
    std::size_t offset;
    double width;     // uniform smoothing of the law, 0 for none
  };
  double component_cdf(const Component& c, double s) const;
  double raw_cdf(const Component& c, double s) const;
  double raw_integral(const Component& c, double s) const;

  std::size_t k_ = 0;
  std::vector<Component> comp_;
  std::vector<double> q_;   // normalized density in v
  std::vector<double> cum_; // CDF at the nodes
  std::vector<double> int_; // integral of the CDF in t up to each node
  double lo_ = 0.0;
  double hi_ = 0.0;
};

//! One coordinate marginal of the posterior, whichever integrator built it.
class Marginal {
public:
  Marginal() = default;
  explicit Marginal(PiecewiseMixture m) : law_(std::move(m)) {}
  explicit Marginal(WeightedAtoms a) : law_(std::move(a)) {}
  explicit Marginal(ColumnMixture c) : law_(std::move(c)) {}

  bool discrete() const { return std::holds_alternative<WeightedAtoms>(law_); }
  double cdf(double s) const
  {
    return std::visit([s](const auto& l) { return l.cdf(s); }, law_);
  }
  //! P(U < s); equals cdf for the continuous laws.
  double prob_below(double s) const
  {
    if (const auto* a = std::get_if<WeightedAtoms>(&law_))
      return a->prob_below(s);
    return cdf(s);
  }
  double abs_dev(double s) const
  {
    return std::visit([s](const auto& l) { return l.abs_dev(s); }, law_);
  }
  double median() const
  {
    return std::visit([](const auto& l) { return l.median(); }, law_);
  }
  double quantile(double p) const
  {
    return std::visit([p](const auto& l) { return l.quantile(p); }, law_);
  }
  double mean() const
  {
    return std::visit([](const auto& l) { return l.mean(); }, law_);
  }
  double lower() const
  {
    return std::visit([](const auto& l) { return l.lower(); }, law_);
  }
  double upper() const
  {
    return std::visit([](const auto& l) { return l.upper(); }, law_);
  }
  //! Subgradient of s -> E|s - U|: P(U < s) - P(U > s).
  double slope(double s) const { return prob_below(s) - (1.0 - cdf(s)); }

private:
  std::variant<PiecewiseMixture, WeightedAtoms, ColumnMixture> law_;
};

//! Histogram over cell edges as a one-component piecewise-linear CDF.
PiecewiseMixture histogram(std::span<const double> edges, std::span<const double> masses);

} // namespace mulreg
