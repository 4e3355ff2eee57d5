#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "qig/fisher.hpp"
#include "qig/models.hpp"
#include "qig/numlin.hpp"

// Closed-form upper bounds on Gamma_p = max Tr[(p F_Q)^{-1} F_Cp] over
// p-local measurements, and the conversion to weighted-covariance lower
// bounds.

namespace qig {

// max{ 1/(4(n-1)), (n-2)/(n-1)^2, 1/5 }; all three choices give valid
// bounds, the max gives the tightest one.
double f_n(int n);

// Pure states: Gamma <= n - f(n) ||F_Q^{-1/2} F_Im F_Q^{-1/2}||_F^2, the
// same value for every p. Caller is responsible for checking rank 1.
double pure_state_gamma_bound(const FisherMatrix& fq, const RMat& fim, int n);

// (C_p)_jk = ||sqrt(rho^p) [L~_jp, L~_kp] sqrt(rho^p)||_1 / 2 computed from
// the reparametrized single-copy SLDs.
struct CpMatrix {
  RMat m;
  int p = 1;
};

CpMatrix cp_matrix(const DensityMatrix& rho, const SLDSet& slds_tilde, int p);

// Gamma_p <= n - ||C_p / p||_F^2 / (4(n-1)).
double cp_gamma_bound(const CpMatrix& cp, int p, int n);

// Gamma_p <= n - f(n) ||F_Q^{-1/2} Fbar_Imp F_Q^{-1/2} / p||_F^2 where
// Fbar sums <u_q| sqrt(rho^p) L_jp L_kp sqrt(rho^p) |u_q> Gram matrices with
// per-q transposes chosen by the mask. Any frame {u_q} resolving the
// identity and any mask give a valid bound.
double fbar_imp_gamma_bound(const DensityMatrix& rho, const SLDSet& slds,
                            int p, const std::vector<CVec>& u_set,
                            const std::vector<int>& transpose_mask);

// lim_{p->inf} (C_p)_jk / p = |Tr(rho [L~_j, L~_k])| / 2.
RMat cp_limit_matrix(const DensityMatrix& rho, const SLDSet& slds_tilde);

enum class TpMode { exact, monte_carlo };

struct TpMatrix {
  RMat m;
  RMat std_error;  // zero for exact mode
  int p = 1;
  TpMode mode = TpMode::exact;
  long samples = 0;
};

// (T_p)_jk = E |sum_r <Phi_r|[L~_j, L~_k]|Phi_r>| / 2 over eigenvector
// strings Phi drawn with the eigenvalue weights. Exact mode enumerates
// multinomial count vectors (the summand depends only on counts);
// monte-carlo mode samples strings and reports a standard error.
TpMatrix tp_matrix(const DensityMatrix& rho, const SLDSet& slds_tilde, int p,
                   TpMode mode, long samples = 0, std::uint64_t seed = 1);

// Gamma_p <= n - ||T_p / p||_F^2 / (4(n-1)).
double tp_gamma_bound(const TpMatrix& tp, int p, int n);

// 1-local: Tr[F_Q^{-1} F_C] <= d - 1 (nontrivial only when n >= d).
double gill_massar_bound(int d);

// 2-local: Tr[F_Q2^{-1} F_C2] <= 3(d-1)/2 (nontrivial only when
// n >= 3(d-1)/2).
double zhu_hayashi_bound(int d);

// nu Tr[W Cov] >= (Tr sqrt(F_Q^{-1/2} W F_Q^{-1/2}))^2 / D for any valid
// upper bound Gamma_p <= D.
double weighted_cov_lower_bound(const RMat& w, const FisherMatrix& fq,
                                double d_bound);

struct BoundEntry {
  std::string name;
  double value = 0.0;
  std::string status;  // "ok", "skipped: ...", "non-binding"
  std::string meta;
  bool gamma_bound = true;
};

struct BoundReport {
  std::string model;
  RVec x;
  int p = 1;
  int n = 0;
  int d = 0;
  std::vector<BoundEntry> entries;
};

// Minimum over applicable Gamma upper bounds, trivial cap included. Ties
// break by the precedence cp > tp > fbar > pure > gill_massar >
// zhu_hayashi > trivial.
std::pair<std::string, double> best_gamma_bound(const BoundReport& report);

struct BoundOptions {
  std::vector<int> p_list{1};
  int frames = 0;  // extra random frames/masks tried for the fbar bound
  std::uint64_t seed = 1;
  long tp_samples = 100000;  // monte-carlo fallback sample count
  RMat weight;  // W for the covariance conversion; empty means identity
};

// Full per-p report: trivial cap, pure-state bound (when rank 1), fbar, cp,
// tp, Gill-Massar, Zhu-Hayashi, the QCRB reference value and the Eq-style
// covariance conversion of the best Gamma bound.
std::vector<BoundReport> bound_reports(const StateModel& model, const RVec& x,
                                       const BoundOptions& opts = {});

// Frame helpers shared with the convex-bound module and tests: vectors
// {u_q} with sum_q |u_q><u_q| = I.
std::vector<CVec> eigenvector_frame(const DensityMatrix& rho);
std::vector<CVec> random_frame(int dim, int count, Rng& rng);

}  // namespace qig
