#include "qig/numlin.hpp"

#include <atomic>
#include <cmath>
#include <string>

#include "qig/errors.hpp"

namespace qig {

namespace {

std::atomic<std::size_t> g_dimension_limit{4096};

void require_square(const CMat& a, const char* who) {
  if (a.rows() != a.cols())
    throw InvalidInputError(std::string(who) + ": matrix is not square (" +
                            std::to_string(a.rows()) + "x" +
                            std::to_string(a.cols()) + ")");
}

void require_finite(const CMat& a, const char* who) {
  if (!a.allFinite())
    throw InvalidInputError(std::string(who) + ": non-finite entries");
}

}  // namespace

std::size_t dimension_limit() { return g_dimension_limit.load(); }

void set_dimension_limit(std::size_t limit) {
  if (limit == 0) throw InvalidInputError("dimension limit must be positive");
  g_dimension_limit.store(limit);
}

double max_abs(const CMat& a) {
  return a.size() == 0 ? 0.0 : a.cwiseAbs().maxCoeff();
}

bool is_hermitian(const CMat& a, double rel_tol) {
  if (a.rows() != a.cols()) return false;
  const double scale = std::max(1.0, max_abs(a));
  return max_abs(a - a.adjoint()) <= rel_tol * scale;
}

CMat hermitize(const CMat& a, double rel_tol) {
  require_square(a, "hermitize");
  require_finite(a, "hermitize");
  const double scale = std::max(1.0, max_abs(a));
  const double dev = max_abs(a - a.adjoint());
  if (dev > rel_tol * scale)
    throw InvalidInputError("hermitize: deviation from Hermiticity " +
                            std::to_string(dev) + " exceeds tolerance");
  return 0.5 * (a + a.adjoint());
}

EigSystem eig_hermitian(const CMat& a) {
  const CMat h = hermitize(a);
  Eigen::SelfAdjointEigenSolver<CMat> solver(h);
  if (solver.info() != Eigen::Success)
    throw InvalidInputError("eig_hermitian: eigensolver failed to converge");
  return EigSystem{solver.eigenvalues(), solver.eigenvectors()};
}

CMat psd_sqrt(const CMat& a) {
  EigSystem es = eig_hermitian(a);
  const double wmax = es.eigenvalues.size() ? es.eigenvalues.maxCoeff() : 0.0;
  const double hard_floor = -1e-6 * std::max(1.0, wmax);
  RVec root(es.eigenvalues.size());
  for (Eigen::Index i = 0; i < es.eigenvalues.size(); ++i) {
    const double w = es.eigenvalues[i];
    if (w < hard_floor)
      throw NotPsdError("psd_sqrt: eigenvalue " + std::to_string(w) +
                        " is genuinely negative");
    root[i] = w > 0.0 ? std::sqrt(w) : 0.0;
  }
  CMat b = es.eigenvectors * root.asDiagonal() *
           es.eigenvectors.adjoint();
  return 0.5 * (b + b.adjoint());
}

double trace_norm(const CMat& a) {
  require_finite(a, "trace_norm");
  // Singular values via eig of A^dag A; adequate at desk dimensions and
  // avoids a second dense factorization code path.
  const CMat gram = a.adjoint() * a;
  Eigen::SelfAdjointEigenSolver<CMat> solver(0.5 * (gram + gram.adjoint()));
  if (solver.info() != Eigen::Success)
    throw InvalidInputError("trace_norm: eigensolver failed to converge");
  double sum = 0.0;
  for (Eigen::Index i = 0; i < solver.eigenvalues().size(); ++i)
    sum += std::sqrt(std::max(0.0, solver.eigenvalues()[i]));
  return sum;
}

CMat kron(const CMat& a, const CMat& b) {
  require_finite(a, "kron");
  require_finite(b, "kron");
  const std::size_t rows = static_cast<std::size_t>(a.rows()) * b.rows();
  const std::size_t cols = static_cast<std::size_t>(a.cols()) * b.cols();
  const std::size_t limit = dimension_limit();
  if (rows > limit || cols > limit)
    throw ResourceLimitError("kron: output dimension " +
                             std::to_string(std::max(rows, cols)) +
                             " exceeds limit " + std::to_string(limit));
  CMat out(rows, cols);
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

CMat kron_power(const CMat& a, int p) {
  if (p < 1) throw InvalidInputError("kron_power: p must be >= 1");
  CMat out = a;
  for (int i = 1; i < p; ++i) out = kron(out, a);
  return out;
}

CMat commutator(const CMat& a, const CMat& b) { return a * b - b * a; }

double hs_inner(const CMat& a, const CMat& b) {
  return (a.adjoint() * b).trace().real();
}

RMat spd_sqrt(const RMat& a) {
  Eigen::SelfAdjointEigenSolver<RMat> solver(0.5 * (a + a.transpose()));
  RVec root(solver.eigenvalues().size());
  for (Eigen::Index i = 0; i < root.size(); ++i) {
    const double w = solver.eigenvalues()[i];
    if (w < -1e-9 * std::max(1.0, solver.eigenvalues().maxCoeff()))
      throw NotPsdError("spd_sqrt: negative eigenvalue " + std::to_string(w));
    root[i] = w > 0.0 ? std::sqrt(w) : 0.0;
  }
  return solver.eigenvectors() * root.asDiagonal() *
         solver.eigenvectors().transpose();
}

namespace {

RMat spd_power(const RMat& a, double expo, double cond_limit,
               const char* who) {
  Eigen::SelfAdjointEigenSolver<RMat> solver(0.5 * (a + a.transpose()));
  const RVec& w = solver.eigenvalues();
  const double wmax = w.maxCoeff();
  const double wmin = w.minCoeff();
  if (wmin <= 0.0 || wmax / wmin > cond_limit)
    throw SingularMetricError(std::string(who) +
                              ": matrix is singular or ill-conditioned (min "
                              "eig " + std::to_string(wmin) + ")");
  RVec powered(w.size());
  for (Eigen::Index i = 0; i < w.size(); ++i) powered[i] = std::pow(w[i], expo);
  return solver.eigenvectors() * powered.asDiagonal() *
         solver.eigenvectors().transpose();
}

}  // namespace

RMat spd_inverse(const RMat& a, double cond_limit) {
  return spd_power(a, -1.0, cond_limit, "spd_inverse");
}

RMat spd_inverse_sqrt(const RMat& a, double cond_limit) {
  return spd_power(a, -0.5, cond_limit, "spd_inverse_sqrt");
}

double min_eig_sym(const RMat& a) {
  Eigen::SelfAdjointEigenSolver<RMat> solver(0.5 * (a + a.transpose()));
  return solver.eigenvalues().minCoeff();
}

double min_eig_herm(const CMat& a) {
  Eigen::SelfAdjointEigenSolver<CMat> solver(0.5 * (a + a.adjoint()));
  return solver.eigenvalues().minCoeff();
}

CMat random_gaussian(int rows, int cols, Rng& rng) {
  CMat out(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i)
      out(i, j) = Complex(rng.normal(), rng.normal());
  return out;
}

CMat random_hermitian(int dim, Rng& rng) {
  const CMat g = random_gaussian(dim, dim, rng);
  return 0.5 * (g + g.adjoint());
}

CMat random_psd(int dim, Rng& rng) {
  const CMat g = random_gaussian(dim, dim, rng);
  CMat p = g * g.adjoint() / static_cast<double>(dim);
  return 0.5 * (p + p.adjoint());
}

CMat orthonormalize(const CMat& a) {
  if (a.rows() < a.cols())
    throw InvalidInputError("orthonormalize: need rows >= cols");
  Eigen::HouseholderQR<CMat> qr(a);
  CMat q = qr.householderQ() * CMat::Identity(a.rows(), a.cols());
  const CMat r = q.adjoint() * a;
  // Fix the phase freedom so the factor is unique and continuous in a.
  for (Eigen::Index j = 0; j < q.cols(); ++j) {
    const Complex d = r(j, j);
    const double mag = std::abs(d);
    if (mag > 1e-14) q.col(j) *= d / mag;
  }
  return q;
}

CMat random_unitary(int dim, Rng& rng) {
  return orthonormalize(random_gaussian(dim, dim, rng));
}

}  // namespace qig
