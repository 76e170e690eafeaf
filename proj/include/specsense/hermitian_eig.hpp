#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace specsense::linalg {

/// Eigenvalues (ascending) of a real symmetric n x n row-major matrix by cyclic Jacobi rotations.
/// Iterates until the off-diagonal Frobenius norm falls below tol times the matrix norm.
std::vector<double> symmetric_eigenvalues(std::vector<double> a, std::size_t n, double tol = 1e-10);

/// Eigenvalues (ascending) of a Hermitian n x n row-major matrix. Uses the real symmetric
/// embedding [[Re, -Im], [Im, Re]], whose spectrum is that of the input with every value doubled.
std::vector<double> hermitian_eigenvalues(const std::vector<std::complex<double>>& a, std::size_t n,
                                          double tol = 1e-10);

}  // namespace specsense::linalg
