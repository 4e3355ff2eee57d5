#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstddef>

#include "qig/rng.hpp"

// Dense complex Hermitian linear algebra: eigendecomposition, PSD matrix
// functions, norms and tensor products. Hermitian operators are carried as
// plain CMat values validated through hermitize(); every construction site
// of a physical operator goes through that check.

namespace qig {

using Complex = std::complex<double>;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;
using RMat = Eigen::MatrixXd;
using RVec = Eigen::VectorXd;

// Hard cap on operator dimension (d^p). Overridable at runtime, e.g. from
// the QIG_MAX_DIM environment variable in the CLI.
std::size_t dimension_limit();
void set_dimension_limit(std::size_t limit);

double max_abs(const CMat& a);

// Checks ||A - A^dag||_max <= tol * max(1, ||A||_max) and returns the
// symmetrized (A + A^dag)/2. Outside tolerance this is an error, not a
// repair.
CMat hermitize(const CMat& a, double rel_tol = 1e-12);
bool is_hermitian(const CMat& a, double rel_tol = 1e-12);

struct EigSystem {
  RVec eigenvalues;   // ascending
  CMat eigenvectors;  // unitary, columns match eigenvalue order
};

// A = V diag(w) V^dag for Hermitian A.
EigSystem eig_hermitian(const CMat& a);

// Hermitian PSD square root. Eigenvalues in [-1e-6, 0) are treated as
// roundoff and clamped to zero; below -1e-6 (relative to the largest
// eigenvalue) the input is genuinely not PSD.
CMat psd_sqrt(const CMat& a);

// Sum of singular values, computed through the eigenvalues of A^dag A.
double trace_norm(const CMat& a);

CMat kron(const CMat& a, const CMat& b);
CMat kron_power(const CMat& a, int p);

CMat commutator(const CMat& a, const CMat& b);

// Re Tr(A^dag B); the Hilbert-Schmidt inner product restricted to the real
// span of Hermitian operators.
double hs_inner(const CMat& a, const CMat& b);

// Symmetric positive definite helpers for real Fisher-type matrices.
// cond_limit guards against silently pseudo-inverting singular metrics.
RMat spd_sqrt(const RMat& a);
RMat spd_inverse(const RMat& a, double cond_limit = 1e12);
RMat spd_inverse_sqrt(const RMat& a, double cond_limit = 1e12);
double min_eig_sym(const RMat& a);
double min_eig_herm(const CMat& a);

// Random test/search material. All deterministic in the supplied Rng.
CMat random_gaussian(int rows, int cols, Rng& rng);
CMat random_hermitian(int dim, Rng& rng);
CMat random_psd(int dim, Rng& rng);
CMat random_unitary(int dim, Rng& rng);

// Thin QR orthonormalization with the positive-diagonal-R convention, so the
// result is a deterministic function of the input. rows >= cols required.
CMat orthonormalize(const CMat& a);

}  // namespace qig
