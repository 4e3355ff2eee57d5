#include "qig/fisher.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "qig/errors.hpp"

namespace qig {

namespace {

constexpr double kKernelTangentTol = 1e-8;
constexpr double kProbabilityFloor = 1e-12;
constexpr double kCondLimit = 1e12;

}  // namespace

CMat sld(const DensityMatrix& rho, const CMat& drho) {
  const CMat d = hermitize(drho, 1e-8);
  if (d.rows() != rho.dim)
    throw InvalidInputError("sld: tangent dimension mismatch");
  if (std::abs(d.trace()) > kKernelTangentTol)
    throw InvalidInputError("sld: tangent has trace " +
                            std::to_string(std::abs(d.trace())));
  const CMat& v = rho.eigenvectors;
  const RVec& w = rho.eigenvalues;
  CMat in_basis = v.adjoint() * d * v;
  for (Eigen::Index r = 0; r < in_basis.rows(); ++r) {
    for (Eigen::Index s = 0; s < in_basis.cols(); ++s) {
      const double denom = w[r] + w[s];
      if (denom > rho.support_tol) {
        in_basis(r, s) *= 2.0 / denom;
      } else {
        if (std::abs(in_basis(r, s)) > kKernelTangentTol)
          throw InconsistentTangentError(
              "sld: tangent connects kernel to kernel with magnitude " +
              std::to_string(std::abs(in_basis(r, s))));
        in_basis(r, s) = 0.0;
      }
    }
  }
  return hermitize(v * in_basis * v.adjoint(), 1e-10);
}

SLDSet slds(const DensityMatrix& rho, const std::vector<CMat>& tangent_ops) {
  SLDSet out;
  out.ops.reserve(tangent_ops.size());
  for (const auto& d : tangent_ops) out.ops.push_back(sld(rho, d));
  return out;
}

FisherMatrix qfim(const DensityMatrix& rho, const SLDSet& set) {
  const int n = set.n();
  std::vector<CMat> rho_l(n);
  for (int j = 0; j < n; ++j) rho_l[j] = rho.op * set.ops[j];
  RMat f(n, n);
  for (int j = 0; j < n; ++j)
    for (int k = j; k < n; ++k) {
      const double v = (rho_l[j] * set.ops[k]).trace().real();
      f(j, k) = v;
      f(k, j) = v;
    }
  return FisherMatrix{0.5 * (f + f.transpose()), FisherKind::quantum, 1};
}

FisherMatrix cfim(const DensityMatrix& rho, const std::vector<CMat>& tangent_ops,
                  const Povm& povm) {
  if (povm.dim != rho.dim)
    throw InvalidInputError("cfim: POVM dimension " + std::to_string(povm.dim) +
                            " does not match state dimension " +
                            std::to_string(rho.dim));
  CMat sum = CMat::Zero(rho.dim, rho.dim);
  for (const auto& m : povm.elements) sum += m;
  if (max_abs(sum - CMat::Identity(rho.dim, rho.dim)) > 1e-8)
    throw InvalidPovmError("cfim: POVM completeness violated");
  const int n = static_cast<int>(tangent_ops.size());
  RMat f = RMat::Zero(n, n);
  RVec q(n);
  for (const auto& m : povm.elements) {
    const double p = (rho.op * m).trace().real();
    if (p < kProbabilityFloor) continue;
    for (int j = 0; j < n; ++j) q[j] = (tangent_ops[j] * m).trace().real();
    f += (q * q.transpose()) / p;
  }
  return FisherMatrix{0.5 * (f + f.transpose()), FisherKind::classical,
                      povm.locality};
}

double bures_distance(const DensityMatrix& rho1, const DensityMatrix& rho2) {
  if (rho1.dim != rho2.dim)
    throw InvalidInputError("bures_distance: dimension mismatch");
  const CMat root1 = psd_sqrt(rho1.op);
  const CMat inner = root1 * rho2.op * root1;
  EigSystem es = eig_hermitian(0.5 * (inner + inner.adjoint()));
  double fid_root = 0.0;
  for (Eigen::Index i = 0; i < es.eigenvalues.size(); ++i)
    fid_root += std::sqrt(std::max(0.0, es.eigenvalues[i]));
  fid_root = std::clamp(fid_root, 0.0, 1.0);
  return std::sqrt(2.0 - 2.0 * fid_root);
}

SLDSet reparametrized_slds(const SLDSet& set, const FisherMatrix& fq) {
  const int n = set.n();
  if (fq.m.rows() != n)
    throw InvalidInputError("reparametrized_slds: size mismatch");
  const RMat w = spd_inverse_sqrt(fq.m, kCondLimit);
  SLDSet out;
  out.ops.reserve(n);
  for (int j = 0; j < n; ++j) {
    CMat l = CMat::Zero(set.ops[0].rows(), set.ops[0].cols());
    for (int k = 0; k < n; ++k) l += w(j, k) * set.ops[k];
    out.ops.push_back(std::move(l));
  }
  return out;
}

SLDSet tensor_slds(const SLDSet& set, int p) {
  if (p < 1) throw InvalidInputError("tensor_slds: p must be >= 1");
  if (p == 1) return set;
  const Eigen::Index d = set.ops.empty() ? 0 : set.ops[0].rows();
  double big = 1.0;
  for (int i = 0; i < p; ++i) big *= static_cast<double>(d);
  if (big > static_cast<double>(dimension_limit()))
    throw ResourceLimitError("tensor_slds: d^p = " + std::to_string(big) +
                             " exceeds limit " +
                             std::to_string(dimension_limit()));
  SLDSet out;
  out.ops.reserve(set.ops.size());
  for (const auto& l : set.ops) {
    const Eigen::Index dp = static_cast<Eigen::Index>(big);
    CMat sum = CMat::Zero(dp, dp);
    for (int i = 0; i < p; ++i) {
      CMat term = CMat::Identity(1, 1);
      for (int k = 0; k < p; ++k)
        term = kron(term, k == i ? l : CMat::Identity(d, d));
      sum += term;
    }
    out.ops.push_back(std::move(sum));
  }
  return out;
}

RMat f_im(const DensityMatrix& rho, const SLDSet& set) {
  const int n = set.n();
  RMat out = RMat::Zero(n, n);
  for (int j = 0; j < n; ++j)
    for (int k = j + 1; k < n; ++k) {
      const double v = (rho.op * set.ops[j] * set.ops[k]).trace().imag();
      out(j, k) = v;
      out(k, j) = -v;
    }
  return out;
}

CommutatorReport commutator_report(const DensityMatrix& rho, const SLDSet& set) {
  const int n = set.n();
  // Support eigenvectors only; the eigenvalues are ascending so the support
  // sits at the tail.
  std::vector<int> support;
  for (int i = 0; i < rho.dim; ++i)
    if (rho.is_support(i)) support.push_back(i);
  CMat psi(rho.dim, support.size());
  for (std::size_t c = 0; c < support.size(); ++c)
    psi.col(c) = rho.eigenvectors.col(support[c]);
  CommutatorReport report;
  report.tolerance = rho.support_tol;
  for (int j = 0; j < n; ++j)
    for (int k = j + 1; k < n; ++k) {
      const CMat comm = commutator(set.ops[j], set.ops[k]);
      report.partial_max =
          std::max(report.partial_max, max_abs(psi.adjoint() * comm * psi));
      report.weak_max =
          std::max(report.weak_max, std::abs((rho.op * comm).trace()));
    }
  return report;
}

DensityMatrix tensor_power_state(const DensityMatrix& rho, int p) {
  if (p < 1) throw InvalidInputError("tensor_power_state: p must be >= 1");
  if (p == 1) return rho;
  const CMat op = kron_power(rho.op, p);
  // Assemble the eigensystem from the factor eigensystem instead of
  // rediagonalizing the big matrix.
  CMat vectors = kron_power(rho.eigenvectors, p);
  const Eigen::Index dp = op.rows();
  RVec values(dp);
  for (Eigen::Index flat = 0; flat < dp; ++flat) {
    double w = 1.0;
    Eigen::Index rest = flat;
    for (int k = 0; k < p; ++k) {
      w *= rho.eigenvalues[rest % rho.dim];
      rest /= rho.dim;
    }
    values[flat] = w;
  }
  std::vector<Eigen::Index> order(dp);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index a, Eigen::Index b) {
                     return values[a] < values[b];
                   });
  DensityMatrix out;
  out.dim = static_cast<int>(dp);
  out.op = op;
  out.eigenvalues = RVec(dp);
  out.eigenvectors = CMat(dp, dp);
  for (Eigen::Index i = 0; i < dp; ++i) {
    out.eigenvalues[i] = values[order[i]];
    out.eigenvectors.col(i) = vectors.col(order[i]);
  }
  out.support_tol = 1e-10 * out.eigenvalues.maxCoeff();
  out.support_rank = 0;
  for (Eigen::Index i = 0; i < dp; ++i)
    if (out.eigenvalues[i] > out.support_tol) ++out.support_rank;
  return out;
}

std::vector<CMat> tensor_tangent(const DensityMatrix& rho,
                                 const std::vector<CMat>& tangent_ops, int p) {
  if (p == 1) return tangent_ops;
  std::vector<CMat> out;
  out.reserve(tangent_ops.size());
  for (const auto& d : tangent_ops) {
    CMat sum;
    for (int i = 0; i < p; ++i) {
      CMat term = CMat::Identity(1, 1);
      for (int k = 0; k < p; ++k) term = kron(term, k == i ? d : rho.op);
      if (i == 0)
        sum = term;
      else
        sum += term;
    }
    out.push_back(std::move(sum));
  }
  return out;
}

SLDSet slds_at(const StateModel& model, const RVec& x) {
  const DensityMatrix rho = evaluate(model, x);
  return slds(rho, tangent(model, x));
}

}  // namespace qig
