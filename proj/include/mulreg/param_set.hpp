#pragma once

#include "mulreg/local_poly.hpp"

#include <span>
#include <vector>

namespace mulreg {

//! Theta(A, M) = { t : 2 t_0 - ||t||_1 >= A, ||t||_1 <= M }.
//! Every member satisfies A <= f_t(x) <= M on the window cube.
struct ParamSet {
  double a_low = 0.0;
  double m_up = 0.0;
  IndexSetPtr idx;

  ParamSet() = default;
  //! Throws InvalidBounds unless 0 < a_low < m_up.
  ParamSet(double a_low, double m_up, IndexSetPtr idx);

  std::size_t dim() const { return idx->size(); }
  //! Largest |t_p| over the set, p != 0: (M - A) / 2.
  double rest_radius() const { return 0.5 * (m_up - a_low); }
};

//! Exact predicate; tol relaxes both inequalities.
bool membership(std::span<const double> t, const ParamSet& set, double tol = 0.0);
bool membership(const PolyCoeffs& t, const ParamSet& set, double tol = 0.0);

//! Euclidean projection onto Theta(A, M).
std::vector<double> project_onto(std::span<const double> t, const ParamSet& set);

//! Euclidean projection onto the l1 ball of the given radius.
std::vector<double> project_l1_ball(std::span<const double> v, double radius);

} // namespace mulreg
