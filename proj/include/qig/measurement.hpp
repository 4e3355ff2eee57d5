#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "qig/fisher.hpp"
#include "qig/models.hpp"
#include "qig/povm.hpp"

// Numerical maximization of Gamma_p = Tr[(p F_Q)^{-1} F_Cp] over p-local
// POVMs, and the weighted-covariance counterpart. Results are lower
// witnesses, never certificates: the landscape is nonconvex and every output
// is labeled "best found".

namespace qig {

struct GammaResult {
  Povm best_povm;
  double gamma = 0.0;  // best found
  std::vector<double> restart_values;
  int iterations = 0;  // total ascent iterations across restarts
  std::uint64_t seed = 0;
};

struct OptimizeOptions {
  int outcomes = 0;  // K; 0 means the default (d^p)^2
  int restarts = 4;
  int iters = 200;
  std::uint64_t seed = 1;
  // Restart 0 seeds from the SLD-eigenbasis construction (and the warm
  // start, when given) instead of a random isometry.
  bool informed_starts = true;
  std::optional<Povm> warm_start;
};

// Tr[(p F_Q)^{-1} F_Cp] for a given p-local POVM.
double gamma_of(const StateModel& model, const RVec& x, const Povm& povm);

// Gradient ascent over the isometry parametrization M_a = V_a^dag V_a with
// QR retraction; returns the best POVM over restarts.
GammaResult optimize_gamma(const StateModel& model, const RVec& x, int p,
                           const OptimizeOptions& opts = {});

struct CovSearchResult {
  Povm best_povm;
  double value = 0.0;  // best found Tr[W F_Cp^{-1}] (per single application)
  std::vector<double> restart_values;
  std::uint64_t seed = 0;
};

// Minimizes Tr[W F_Cp^{-1}] over p-local POVMs; the measurement-side
// counterpart of the covariance lower bounds.
CovSearchResult optimize_cov(const StateModel& model, const RVec& x, int p,
                             const RMat& w, const OptimizeOptions& opts = {});

}  // namespace qig
