#include "qig/models.hpp"

#include <cmath>

#include "doctest.h"
#include "qig/errors.hpp"

using namespace qig;

TEST_CASE("registry provides the built-in families") {
  CHECK(lookup_model("pure_qubit").n == 2);
  CHECK(lookup_model("pure_qubit").d == 2);
  CHECK(lookup_model("bloch_3p").n == 3);
  CHECK(lookup_model("bloch_3p").d == 2);
  CHECK(lookup_model("noisy_qubit").n == 2);
  CHECK(lookup_model("classical_2p").d == 3);
  CHECK(lookup_model("unitary_2p").n == 2);
  CHECK_THROWS_AS(lookup_model("does_not_exist"), NotFoundError);
}

TEST_CASE("pure_qubit at (pi/2, 0) is the plus state") {
  RVec x(2);
  x << M_PI / 2.0, 0.0;
  const DensityMatrix rho = evaluate(lookup_model("pure_qubit"), x);
  CMat expected(2, 2);
  expected << 0.5, 0.5, 0.5, 0.5;
  CHECK(max_abs(rho.op - expected) < 1e-14);
  CHECK(rho.support_rank == 1);
}

TEST_CASE("classical_2p evaluates to the stated diagonal") {
  RVec x(2);
  x << 0.2, 0.3;
  const DensityMatrix rho = evaluate(lookup_model("classical_2p"), x);
  CHECK(rho.op(0, 0).real() == doctest::Approx(0.2));
  CHECK(rho.op(1, 1).real() == doctest::Approx(0.3));
  CHECK(rho.op(2, 2).real() == doctest::Approx(0.5));

  const auto t = tangent(lookup_model("classical_2p"), x);
  CHECK(t[0](0, 0).real() == doctest::Approx(1.0));
  CHECK(t[0](1, 1).real() == doctest::Approx(0.0));
  CHECK(t[0](2, 2).real() == doctest::Approx(-1.0));
}

TEST_CASE("bloch_3p eigenvalues follow (1 +/- |r|)/2") {
  RVec x(3);
  x << 0.3, 0.0, 0.0;
  const DensityMatrix rho = evaluate(lookup_model("bloch_3p"), x);
  CHECK(rho.eigenvalues[0] == doctest::Approx(0.35).epsilon(1e-12));
  CHECK(rho.eigenvalues[1] == doctest::Approx(0.65).epsilon(1e-12));
}

TEST_CASE("domain violations name the offending parameter") {
  RVec x(2);
  x << 3.5, 0.0;
  CHECK_THROWS_AS(evaluate(lookup_model("pure_qubit"), x), DomainError);
  try {
    evaluate(lookup_model("pure_qubit"), x);
  } catch (const DomainError& e) {
    CHECK(std::string(e.what()).find("parameter 1") != std::string::npos);
  }

  RVec bad(2);
  bad << 0.5, 0.52;
  CHECK_THROWS_AS(evaluate(lookup_model("classical_2p"), bad), DomainError);

  RVec wrong_len(3);
  wrong_len << 0.2, 0.3, 0.4;
  CHECK_THROWS_AS(evaluate(lookup_model("classical_2p"), wrong_len), DomainError);
}

TEST_CASE("analytic and finite-difference tangents agree") {
  StateModel analytic = lookup_model("pure_qubit");
  StateModel numeric = analytic;
  numeric.analytic_tangent = nullptr;
  RVec x(2);
  x << 0.7, 0.3;
  const auto ta = tangent(analytic, x);
  const auto tn = tangent(numeric, x);
  for (int j = 0; j < 2; ++j) CHECK(max_abs(ta[j] - tn[j]) <= 1e-8);
}

TEST_CASE("tangents are traceless and Hermitian on all registry models") {
  Rng rng(17);
  for (const auto& model : registry()) {
    for (int trial = 0; trial < 10; ++trial) {
      RVec x(model.n);
      bool ok = false;
      while (!ok) {
        for (int j = 0; j < model.n; ++j) {
          const auto& iv = model.domain[j];
          const double w = iv.hi - iv.lo;
          x[j] = rng.uniform(iv.lo + 0.05 * w, iv.hi - 0.05 * w);
        }
        ok = !model.joint_constraint || model.joint_constraint(x).empty();
      }
      const DensityMatrix rho = evaluate(model, x);
      CHECK(std::abs(rho.op.trace().real() - 1.0) < 1e-10);
      CHECK(rho.eigenvalues.minCoeff() >= 0.0);
      for (const auto& t : tangent(model, x)) {
        CHECK(std::abs(t.trace()) < 1e-8);
        CHECK(max_abs(t - t.adjoint()) < 1e-12);
      }
    }
  }
}

TEST_CASE("finite differences converge at second order") {
  StateModel numeric = lookup_model("unitary_2p");
  numeric.analytic_tangent = nullptr;
  RVec x(2);
  x << 0.4, -0.3;

  // Richardson-extrapolated reference, then compare plain central
  // differences at h and h/2 against it.
  const auto reference = tangent(numeric, x, {.richardson = true});
  const auto exact = tangent(lookup_model("unitary_2p"), x);
  for (int j = 0; j < 2; ++j)
    CHECK(max_abs(reference[j] - exact[j]) < 1e-10);

  const auto raw = [&](double h) {
    RVec xp = x, xm = x;
    xp[0] += h;
    xm[0] -= h;
    return ((numeric.evaluate_raw(xp) - numeric.evaluate_raw(xm)) / (2 * h))
        .eval();
  };
  const double err_h = max_abs(raw(1e-3) - exact[0]);
  const double err_h2 = max_abs(raw(5e-4) - exact[0]);
  CHECK(err_h / err_h2 == doctest::Approx(4.0).epsilon(0.15));
}

TEST_CASE("tangent refuses steps that exit the domain") {
  StateModel numeric = lookup_model("classical_2p");
  numeric.analytic_tangent = nullptr;
  RVec x(2);
  x << 0.010000001, 0.3;
  CHECK_THROWS_AS(tangent(numeric, x), DomainError);
}

TEST_CASE("conjugate_pair and qubit_line helpers produce valid families") {
  const StateModel cp = make_conjugate_pair();
  RVec x(2);
  x << 0.6, -0.4;
  const DensityMatrix rho = evaluate(cp, x);
  CHECK(rho.dim == 4);
  CHECK(rho.support_rank == 4);

  const StateModel line = make_qubit_line(99);
  RVec t(1);
  t << 0.1;
  const DensityMatrix rho_line = evaluate(line, t);
  CHECK(rho_line.dim == 2);
  CHECK(rho_line.eigenvalues.minCoeff() > 0.0);
  // Deterministic in the seed.
  const StateModel line2 = make_qubit_line(99);
  CHECK(max_abs(rho_line.op - evaluate(line2, t).op) == 0.0);
}
