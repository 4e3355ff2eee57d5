#include "qig/numlin.hpp"

#include "doctest.h"
#include "qig/errors.hpp"
#include "qig/rng.hpp"

using namespace qig;

namespace {

CMat pauli_x() {
  CMat m(2, 2);
  m << 0, 1, 1, 0;
  return m;
}

}  // namespace

TEST_CASE("eig_hermitian on diagonal and known spectra") {
  CMat d = CMat::Zero(2, 2);
  d(0, 0) = 1.0;
  d(1, 1) = 2.0;
  EigSystem es = eig_hermitian(d);
  CHECK(es.eigenvalues[0] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(es.eigenvalues[1] == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(max_abs(es.eigenvectors.cwiseAbs() - CMat::Identity(2, 2)) < 1e-12);

  EigSystem px = eig_hermitian(pauli_x());
  CHECK(px.eigenvalues[0] == doctest::Approx(-1.0).epsilon(1e-14));
  CHECK(px.eigenvalues[1] == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("eig_hermitian reconstruction and unitarity on random input") {
  Rng rng(42);
  const CMat a = random_hermitian(6, rng);
  EigSystem es = eig_hermitian(a);
  const CMat recon = es.eigenvectors * es.eigenvalues.asDiagonal() *
                     es.eigenvectors.adjoint();
  CHECK((recon - a).norm() <= 1e-10 * std::max(1.0, a.norm()));
  CHECK((es.eigenvectors.adjoint() * es.eigenvectors - CMat::Identity(6, 6))
            .norm() < 1e-10);
  for (int i = 1; i < es.eigenvalues.size(); ++i)
    CHECK(es.eigenvalues[i] >= es.eigenvalues[i - 1]);
}

TEST_CASE("eig_hermitian rejects bad input") {
  CHECK_THROWS_AS(eig_hermitian(CMat::Random(2, 3)), InvalidInputError);
  CMat skew(2, 2);
  skew << 0, 1, 2, 0;
  CHECK_THROWS_AS(eig_hermitian(skew), InvalidInputError);
}

TEST_CASE("hermitize symmetrizes within tolerance only") {
  CMat almost(2, 2);
  almost << 1.0, Complex(0.5, 1e-14), Complex(0.5, -1e-14), 2.0;
  const CMat h = hermitize(almost);
  CHECK(max_abs(h - h.adjoint()) == 0.0);
}

TEST_CASE("psd_sqrt on identity, diagonal and random PSD") {
  CHECK(max_abs(psd_sqrt(CMat::Identity(3, 3)) - CMat::Identity(3, 3)) < 1e-14);

  CMat d = CMat::Zero(2, 2);
  d(0, 0) = 4.0;
  d(1, 1) = 9.0;
  const CMat r = psd_sqrt(d);
  CHECK(r(0, 0).real() == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(r(1, 1).real() == doctest::Approx(3.0).epsilon(1e-14));

  Rng rng(7);
  const CMat a = random_psd(4, rng);
  const CMat b = psd_sqrt(a);
  CHECK((b * b - a).norm() <= 1e-9 * std::max(1.0, a.norm()));
  CHECK(min_eig_herm(b) >= -1e-12);
}

TEST_CASE("psd_sqrt rejects genuinely negative input") {
  CMat d = CMat::Zero(2, 2);
  d(0, 0) = 1.0;
  d(1, 1) = -1e-3;
  CHECK_THROWS_AS(psd_sqrt(d), NotPsdError);
}

TEST_CASE("trace_norm basics") {
  CMat d = CMat::Zero(2, 2);
  d(0, 0) = 1.0;
  d(1, 1) = -2.0;
  CHECK(trace_norm(d) == doctest::Approx(3.0).epsilon(1e-12));

  Rng rng(3);
  const CMat u = random_unitary(4, rng);
  CHECK(trace_norm(u) == doctest::Approx(4.0).epsilon(1e-10));

  CVec uvec(3), vvec(2);
  uvec << 2.0, 0.0, 0.0;
  vvec << 0.0, 3.0;
  CHECK(trace_norm(uvec * vvec.adjoint()) == doctest::Approx(6.0).epsilon(1e-12));
}

TEST_CASE("trace_norm unitary invariance and adjoint symmetry") {
  Rng rng(11);
  const CMat a = random_gaussian(4, 4, rng);
  const CMat u = random_unitary(4, rng);
  const CMat v = random_unitary(4, rng);
  const double tn = trace_norm(a);
  CHECK(trace_norm(a.adjoint()) == doctest::Approx(tn).epsilon(1e-12));
  CHECK(trace_norm(u * a * v) == doctest::Approx(tn).epsilon(1e-9));
  CHECK(tn >= std::abs(a.trace()) - 1e-12);
}

TEST_CASE("kron identities and the mixed-product property") {
  const CMat i2 = CMat::Identity(2, 2);
  CHECK(max_abs(kron(i2, i2) - CMat::Identity(4, 4)) == 0.0);

  Rng rng(3);
  const CMat a = random_gaussian(2, 2, rng);
  const CMat b = random_gaussian(2, 2, rng);
  const CMat c = random_gaussian(2, 2, rng);
  const CMat d = random_gaussian(2, 2, rng);
  CHECK(max_abs(kron(a, b) * kron(c, d) - kron((a * c).eval(), (b * d).eval())) <
        1e-12);
  CHECK(max_abs(kron_power(a, 1) - a) == 0.0);
}

TEST_CASE("kron respects the dimension limit") {
  const std::size_t saved = dimension_limit();
  set_dimension_limit(8);
  const CMat i4 = CMat::Identity(4, 4);
  CHECK_THROWS_AS(kron(i4, i4), ResourceLimitError);
  try {
    kron(i4, i4);
  } catch (const ResourceLimitError& e) {
    CHECK(std::string(e.what()).find("16") != std::string::npos);
  }
  set_dimension_limit(saved);
  CHECK_NOTHROW(kron(i4, i4));
}

TEST_CASE("psd_sqrt is monotone on commuting diagonal inputs") {
  CMat a = CMat::Zero(3, 3), b = CMat::Zero(3, 3);
  a.diagonal() << 1.0, 2.0, 0.5;
  b.diagonal() << 2.0, 2.5, 1.0;
  const CMat ra = psd_sqrt(a), rb = psd_sqrt(b);
  for (int i = 0; i < 3; ++i)
    CHECK(ra(i, i).real() <= rb(i, i).real() + 1e-14);
}

TEST_CASE("orthonormalize returns a deterministic isometry") {
  Rng rng(5);
  const CMat g = random_gaussian(8, 3, rng);
  const CMat q = orthonormalize(g);
  CHECK((q.adjoint() * q - CMat::Identity(3, 3)).norm() < 1e-13);
  const CMat q2 = orthonormalize(g);
  CHECK(max_abs(q - q2) == 0.0);
}

TEST_CASE("spd helpers invert and guard conditioning") {
  RMat f(2, 2);
  f << 4.0, 1.0, 1.0, 3.0;
  const RMat inv = spd_inverse(f);
  CHECK((f * inv - RMat::Identity(2, 2)).norm() < 1e-12);
  const RMat is = spd_inverse_sqrt(f);
  CHECK((is * f * is - RMat::Identity(2, 2)).norm() < 1e-12);

  RMat sing = RMat::Zero(2, 2);
  sing(0, 0) = 1.0;
  CHECK_THROWS_AS(spd_inverse(sing), SingularMetricError);
}
