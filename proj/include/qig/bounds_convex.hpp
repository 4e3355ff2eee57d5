#pragma once

#include <cstdint>
#include <vector>

#include "qig/fisher.hpp"
#include "qig/models.hpp"
#include "qig/numlin.hpp"
#include "qig/povm.hpp"

// Lower bounds on weighted covariance via minimization over locally unbiased
// observable tuples: Holevo, Nagaoka (n = 2) and the general masked-frame
// objective; plus direct verification of the Cov_u / A_u dominance.

namespace qig {

// HS-orthonormal Hermitian operator basis (identity/sqrt(d) first, then the
// generalized Gell-Mann set).
std::vector<CMat> hermitian_basis(int d);

// Affine coordinates for the locally unbiased condition
// Tr(rho X_j) = 0, Tr(d_k rho X_j) = delta_jk: a particular solution
// X_j = sum_k (F_Q^{-1})_jk L_k plus an HS-orthonormal basis of the
// homogeneous solution space (shared across j).
struct UnbiasedSpace {
  std::vector<CMat> particular;
  std::vector<CMat> null_basis;
  int n = 0;
  int ambient_dim = 0;

  int homogeneous_dim() const { return static_cast<int>(null_basis.size()); }
  // X_j(t) with t laid out as n blocks of homogeneous coordinates.
  std::vector<CMat> point(const RVec& t) const;
};

UnbiasedSpace unbiased_space(const DensityMatrix& rho,
                             const std::vector<CMat>& tangent_ops);

struct SolveOptions {
  int max_iters = 400;  // inner quasi-Newton iterations per smoothing stage
  double mu_init = 1e-2;
  double mu_final = 1e-8;
  double mu_factor = 0.1;
  double stage_tol = 1e-7;
  int restarts = 1;
  std::uint64_t seed = 1;
};

struct SolveResult {
  double value = 0.0;  // true (unsmoothed) objective at the final iterate;
                       // an upper estimate of the infimum
  int iterations = 0;
  double final_mu = 0.0;
  double grad_norm = 0.0;
  double stage_change = 0.0;  // last stage-to-stage change (gap proxy)
  bool converged = false;
  std::vector<double> restart_values;
};

// min over locally unbiased {X_j} of Tr[W ReZ(X)] + ||sqrt(W) ImZ(X) sqrt(W)||_1
// with Z_jk = Tr(rho X_j X_k).
SolveResult holevo_bound(const DensityMatrix& rho,
                         const std::vector<CMat>& tangent_ops, const RMat& w,
                         const SolveOptions& opts = {});

// n = 2 only: min of Tr(rho X_1^2) + Tr(rho X_2^2)
//                  + ||sqrt(rho) [X_1, X_2] sqrt(rho)||_1.
SolveResult nagaoka_bound(const DensityMatrix& rho,
                          const std::vector<CMat>& tangent_ops,
                          const SolveOptions& opts = {});

// min of Tr[W Abar_Re] + ||sqrt(W) Abar_Im sqrt(W)||_1 where Abar sums the
// frame matrices (A_u)_jk = <u|sqrt(rho) X_j X_k sqrt(rho)|u> with per-q
// transposes chosen by the mask.
SolveResult general_framework_bound(const DensityMatrix& rho,
                                    const std::vector<CMat>& tangent_ops,
                                    const RMat& w,
                                    const std::vector<CVec>& u_set,
                                    const std::vector<int>& transpose_mask,
                                    const SolveOptions& opts = {});

// Estimator observables X_j = sum_a [xhat_j(a) - x_j] M_a for estimator
// values laid out as a (K x n) matrix.
std::vector<CMat> estimator_observables(const Povm& povm, const RMat& est,
                                        const RVec& x);

// Classically optimal locally unbiased estimator values
// xhat_j(a) = x_j + sum_k (F_C^{-1})_jk Tr(d_k rho M_a) / p_a.
RMat natural_estimator(const DensityMatrix& rho,
                       const std::vector<CMat>& tangent_ops, const Povm& povm,
                       const RVec& x);

// (Cov_u)_jk = sum_a e_j(a) e_k(a) <u|sqrt(rho) M_a sqrt(rho)|u>.
RMat cov_u_matrix(const DensityMatrix& rho, const Povm& povm, const RMat& est,
                  const RVec& x, const CVec& u);

// (A_u)_jk = <u|sqrt(rho) X_j X_k sqrt(rho)|u>.
CMat a_u_matrix(const DensityMatrix& rho, const std::vector<CMat>& x_ops,
                const CVec& u);

// Full covariance sum_a p_a (xhat(a) - x)(xhat(a) - x)^T.
RMat estimator_covariance(const DensityMatrix& rho, const Povm& povm,
                          const RMat& est, const RVec& x);

struct DominanceResult {
  double min_eig_au = 0.0;   // min eig of Cov_u - A_u
  double min_eig_aut = 0.0;  // min eig of Cov_u - A_u^T
};

// Checks the locally unbiased preconditions, then reports the two minimum
// eigenvalues; both are nonnegative up to roundoff for any u.
DominanceResult verify_dominance(const DensityMatrix& rho,
                                 const std::vector<CMat>& tangent_ops,
                                 const Povm& povm, const RMat& est,
                                 const RVec& x, const CVec& u);

}  // namespace qig
