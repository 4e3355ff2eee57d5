#pragma once

#include <vector>

#include "qig/models.hpp"
#include "qig/numlin.hpp"
#include "qig/povm.hpp"

// SLD computation, quantum/classical Fisher information matrices, Bures
// distance, reparametrization, tensor-power SLDs and commutator diagnostics.

namespace qig {

// Symmetric logarithmic derivatives {L_j} of one state. Components on
// ker(rho) x ker(rho), which the defining equation leaves free, are set to
// zero (minimal-norm convention; the QFIM and every bound are insensitive to
// the choice on-support).
struct SLDSet {
  std::vector<CMat> ops;
  int n() const { return static_cast<int>(ops.size()); }
};

enum class FisherKind { quantum, classical };

struct FisherMatrix {
  RMat m;
  FisherKind kind = FisherKind::quantum;
  int copies = 1;
};

struct CommutatorReport {
  double partial_max = 0.0;  // max |<Psi_r|[L_j,L_k]|Psi_s>| over the support
  double weak_max = 0.0;     // max |Tr(rho [L_j,L_k])|
  double tolerance = 0.0;    // support cutoff used
};

// Solves d(rho) = (rho L + L rho)/2 in the eigenbasis of rho:
// L_rs = 2 (drho)_rs / (w_r + w_s) where w_r + w_s is above the support
// cutoff, zero otherwise. A kernel-to-kernel component of drho above 1e-8
// means the tangent is inconsistent with the state.
CMat sld(const DensityMatrix& rho, const CMat& drho);

SLDSet slds(const DensityMatrix& rho, const std::vector<CMat>& tangent_ops);

// F_jk = Tr[rho (L_j L_k + L_k L_j)] / 2.
FisherMatrix qfim(const DensityMatrix& rho, const SLDSet& slds);

// Classical Fisher information of the outcome distribution p(a|x) induced by
// the POVM; outcomes below the 1e-12 probability floor contribute zero.
FisherMatrix cfim(const DensityMatrix& rho, const std::vector<CMat>& tangent_ops,
                  const Povm& povm);

// sqrt(2 - 2 Tr sqrt(sqrt(rho1) rho2 sqrt(rho1))), fidelity clamped to [0,1].
double bures_distance(const DensityMatrix& rho1, const DensityMatrix& rho2);

// L~_j = sum_k (F_Q^{-1/2})_jk L_k; the QFIM of the result is the identity.
SLDSet reparametrized_slds(const SLDSet& slds, const FisherMatrix& fq);

// L_jp = sum_i I x..x L_j x..x I, the SLD of rho^{(x)p}.
SLDSet tensor_slds(const SLDSet& slds, int p);

// (F_Im)_jk = Tr(rho [L_j, L_k]) / (2i); real antisymmetric.
RMat f_im(const DensityMatrix& rho, const SLDSet& slds);

CommutatorReport commutator_report(const DensityMatrix& rho, const SLDSet& slds);

// rho^{(x)p} with its cached eigensystem (assembled from the factor
// eigensystem, so large powers stay cheap and exact).
DensityMatrix tensor_power_state(const DensityMatrix& rho, int p);

// d(rho^{(x)p})/dx_j = sum_i rho x..x d(rho)/dx_j x..x rho.
std::vector<CMat> tensor_tangent(const DensityMatrix& rho,
                                 const std::vector<CMat>& tangent_ops, int p);

// Convenience: SLDs of a model at x (analytic tangents when available).
SLDSet slds_at(const StateModel& model, const RVec& x);

}  // namespace qig
