#include "mulreg/linalg.hpp"

#include "mulreg/error.hpp"

#include <algorithm>
#include <cmath>

namespace mulreg {

Eigen::VectorXd jacobi_eigenvalues(const Eigen::MatrixXd& sym, double tol, int max_sweeps)
{
  if (sym.rows() != sym.cols())
    throw Error(ErrorKind::InvalidArgument, "jacobi_eigenvalues needs a square matrix");
  Eigen::MatrixXd a = 0.5 * (sym + sym.transpose());
  const Eigen::Index n = a.rows();
  const double scale = std::max(a.norm(), 1e-300);

  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double off = 0.0;
    for (Eigen::Index p = 0; p < n; ++p)
      for (Eigen::Index q = p + 1; q < n; ++q)
        off += 2.0 * a(p, q) * a(p, q);
    if (std::sqrt(off) <= tol * scale)
      break;

    for (Eigen::Index p = 0; p < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        if (a(p, q) == 0.0)
          continue;
        // rotation zeroing a(p,q); Golub & Van Loan sym.schur2
        const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
      }
    }
  }
  Eigen::VectorXd ev = a.diagonal();
  std::sort(ev.data(), ev.data() + ev.size());
  return ev;
}

double smallest_eigenvalue(const Eigen::MatrixXd& sym, double tol)
{
  return jacobi_eigenvalues(sym, tol)(0);
}

} // namespace mulreg
