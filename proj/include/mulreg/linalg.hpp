#pragma once

#include <Eigen/Dense>

namespace mulreg {

//! Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, ascending.
//! Iterates until the off-diagonal Frobenius norm falls below tol * ||A||_F.
Eigen::VectorXd jacobi_eigenvalues(const Eigen::MatrixXd& sym, double tol = 1e-12, int max_sweeps = 100);

double smallest_eigenvalue(const Eigen::MatrixXd& sym, double tol = 1e-12);

} // namespace mulreg
