#pragma once

#include <cstdint>
#include <vector>

#include "qig/fisher.hpp"
#include "qig/models.hpp"
#include "qig/povm.hpp"

// Monte-Carlo sampling of measurement outcomes and maximum-likelihood
// estimation; grounds the covariance-side bounds against simulated
// experiments. Everything is reproducible bit-for-bit given seeds.

namespace qig {

struct OutcomeSample {
  std::vector<long> counts;  // one per POVM outcome
  long shots = 0;
  std::uint64_t seed = 0;
};

// Multinomial draw from p(a|x) = Tr(rho M_a). Probabilities within -1e-10
// are clamped to zero; total drift beyond 1e-8 is an invalid POVM.
OutcomeSample sample(const DensityMatrix& rho, const Povm& povm, long shots,
                     std::uint64_t seed);

struct MleResult {
  RVec x;
  bool converged = false;
  double grad_norm = 0.0;  // log-likelihood gradient norm at the estimate
  int iterations = 0;
};

// Maximizes sum_a counts_a log p(a|x) by BFGS inside the model domain,
// starting from x0 (which must be interior). The POVM may be p-local; the
// state is raised to the matching tensor power.
MleResult mle(const StateModel& model, const Povm& povm,
              const OutcomeSample& outcome, const RVec& x0);

struct TrialEnsemble {
  int trials = 0;
  long shots = 0;    // applications of the (p-local) measurement per trial
  int locality = 1;  // p; total copies consumed per trial = shots * p
  RMat estimates;    // trials x n
  RMat covariance;   // empirical, about the true x
  RVec mean;
  RMat fc_inv;                      // per-application CFIM inverse
  double rel_trace_deviation = 0;   // |shots Tr(Cov) - Tr(F_C^{-1})| / Tr(F_C^{-1})
  double nu_trace = 0.0;            // shots * locality * Tr(Cov)
  double nu_trace_se = 0.0;         // standard error of nu_trace over trials
};

// Repeated sample + MLE experiment; estimates start from the truth and the
// covariance is taken about the truth.
TrialEnsemble covariance_experiment(const StateModel& model, const RVec& x,
                                    const Povm& povm, long shots, int trials,
                                    std::uint64_t seed);

}  // namespace qig
