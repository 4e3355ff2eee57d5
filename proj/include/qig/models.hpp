#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "qig/numlin.hpp"

// Parametrized density-matrix families with evaluation and tangent
// computation, plus the registry of built-in models.

namespace qig {

// Hermitian PSD unit-trace operator with cached eigensystem.
struct DensityMatrix {
  int dim = 0;
  CMat op;            // the state itself
  RVec eigenvalues;   // ascending, negatives clamped to zero
  CMat eigenvectors;  // columns match eigenvalue order
  int support_rank = 0;
  double support_tol = 0.0;  // eigenvalues above this count as support

  // Validates trace 1, PSD within roundoff and Hermiticity, then caches the
  // eigensystem. Support rank uses the scale-invariant cutoff
  // 1e-10 * lambda_max.
  static DensityMatrix from_matrix(const CMat& rho);

  bool is_support(int i) const { return eigenvalues[i] > support_tol; }
};

struct Interval {
  double lo = 0.0;
  double hi = 0.0;  // open interval (lo, hi)
};

enum class DerivativeMode { analytic, finite_difference };

// Immutable description of a parametrized family x -> rho_x. Evaluation is
// pure; values are safe to share across threads.
struct StateModel {
  std::string name;
  int n = 0;  // parameter count
  int d = 0;  // Hilbert space dimension
  std::vector<Interval> domain;
  std::function<CMat(const RVec&)> evaluate_raw;
  // Optional analytic derivative supplier; when absent, tangents fall back
  // to central finite differences.
  std::function<std::vector<CMat>(const RVec&)> analytic_tangent;
  // Optional joint-domain constraint; returns a description of the violation
  // or an empty string.
  std::function<std::string(const RVec&)> joint_constraint;

  DerivativeMode derivative_mode() const {
    return analytic_tangent ? DerivativeMode::analytic
                            : DerivativeMode::finite_difference;
  }
};

// Throws DomainError naming the offending parameter when x is outside the
// model domain (margin > 0 additionally requires that distance from every
// interval edge).
void check_domain(const StateModel& model, const RVec& x, double margin = 0.0);

DensityMatrix evaluate(const StateModel& model, const RVec& x);

struct TangentOptions {
  bool richardson = false;  // one Richardson extrapolation level on top of
                            // central differences
};

// n traceless Hermitian operators d(rho)/dx_j. Analytic when the model
// supplies it, otherwise central differences with h = 1e-5 * max(1, |x_j|).
std::vector<CMat> tangent(const StateModel& model, const RVec& x,
                          const TangentOptions& opts = {});

// Built-in families used by tests and the CLI.
StateModel make_pure_qubit();
StateModel make_noisy_qubit(double eta = 0.8);
StateModel make_bloch_3p();
StateModel make_classical_2p();
StateModel make_unitary_2p();
StateModel make_classical_coin();
// Direct sum of the unitary_2p family with its complex conjugate: satisfies
// the weak commutative condition exactly while the SLDs still fail to
// commute on the support.
StateModel make_conjugate_pair();
// Single-parameter qubit line rho(t) = (I + (r0 + t v) . sigma)/2 with
// seeded random r0, v; stays strictly inside the Bloch ball.
StateModel make_qubit_line(std::uint64_t seed);

const std::vector<StateModel>& registry();
const StateModel& lookup_model(const std::string& name);

}  // namespace qig
