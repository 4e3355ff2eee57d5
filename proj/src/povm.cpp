#include "qig/povm.hpp"

#include <cstdio>

#include "qig/errors.hpp"

namespace qig {

namespace {

constexpr double kPsdTol = -1e-9;
constexpr double kCompletenessTol = 1e-8;

}  // namespace

Povm Povm::from_elements(std::vector<CMat> elements, int locality) {
  if (elements.empty()) throw InvalidPovmError("POVM has no elements");
  const Eigen::Index dim = elements.front().rows();
  CMat sum = CMat::Zero(dim, dim);
  for (auto& m : elements) {
    if (m.rows() != dim || m.cols() != dim)
      throw InvalidPovmError("POVM elements have mismatched dimensions");
    m = hermitize(m, 1e-10);
    if (min_eig_herm(m) < kPsdTol)
      throw InvalidPovmError("POVM element has negative eigenvalue " +
                             std::to_string(min_eig_herm(m)));
    sum += m;
  }
  if (max_abs(sum - CMat::Identity(dim, dim)) > kCompletenessTol)
    throw InvalidPovmError("POVM completeness violated by " +
                           std::to_string(max_abs(sum - CMat::Identity(dim, dim))));
  Povm p;
  p.dim = static_cast<int>(dim);
  p.locality = locality;
  p.elements = std::move(elements);
  return p;
}

Povm random_povm(int dim, int outcomes, std::uint64_t seed, int locality) {
  if (outcomes < 2) throw InvalidInputError("random_povm: need K >= 2");
  const std::size_t rows = static_cast<std::size_t>(outcomes) * dim;
  if (rows > dimension_limit() * dimension_limit())
    throw ResourceLimitError("random_povm: K*dim = " + std::to_string(rows) +
                             " beyond resource limit");
  Rng rng(seed);
  const CMat v = orthonormalize(random_gaussian(static_cast<int>(rows), dim, rng));
  std::vector<CMat> elements;
  elements.reserve(outcomes);
  for (int a = 0; a < outcomes; ++a) {
    const CMat block = v.middleRows(static_cast<Eigen::Index>(a) * dim, dim);
    elements.push_back(block.adjoint() * block);
  }
  return Povm::from_elements(std::move(elements), locality);
}

Povm random_projective_povm(int dim, std::uint64_t seed, int locality) {
  Rng rng(seed);
  const CMat u = random_unitary(dim, rng);
  std::vector<CMat> elements;
  elements.reserve(dim);
  for (int a = 0; a < dim; ++a)
    elements.push_back(u.col(a) * u.col(a).adjoint());
  return Povm::from_elements(std::move(elements), locality);
}

Povm sld_eigenbasis_povm(const DensityMatrix& rho, const CMat& sld_op) {
  if (sld_op.rows() != rho.dim)
    throw InvalidInputError("sld_eigenbasis_povm: dimension mismatch");
  EigSystem es = eig_hermitian(sld_op);
  std::vector<CMat> elements;
  elements.reserve(rho.dim);
  for (int a = 0; a < rho.dim; ++a)
    elements.push_back(es.eigenvectors.col(a) * es.eigenvectors.col(a).adjoint());
  return Povm::from_elements(std::move(elements), 1);
}

Povm product_power(const Povm& base, int p) {
  if (p < 1) throw InvalidInputError("product_power: p must be >= 1");
  if (p == 1) return base;
  std::vector<CMat> elements = base.elements;
  for (int i = 1; i < p; ++i) {
    std::vector<CMat> next;
    next.reserve(elements.size() * base.elements.size());
    for (const auto& a : elements)
      for (const auto& b : base.elements) next.push_back(kron(a, b));
    elements = std::move(next);
  }
  return Povm::from_elements(std::move(elements), p);
}

CMat povm_isometry(const Povm& povm) {
  const int dim = povm.dim;
  CMat v(static_cast<Eigen::Index>(povm.outcomes()) * dim, dim);
  for (int a = 0; a < povm.outcomes(); ++a)
    v.middleRows(static_cast<Eigen::Index>(a) * dim, dim) =
        psd_sqrt(povm.elements[a]);
  // Re-orthonormalize so the stack is an exact isometry despite roundoff.
  return orthonormalize(v);
}

std::string povm_digest(const Povm& povm) {
  std::uint64_t h = 1469598103934665603ULL;
  const auto mix = [&h](double value) {
    std::uint64_t bits;
    static_assert(sizeof(bits) == sizeof(value));
    std::memcpy(&bits, &value, sizeof(bits));
    for (int b = 0; b < 8; ++b) {
      h ^= (bits >> (8 * b)) & 0xffULL;
      h *= 1099511628211ULL;
    }
  };
  mix(povm.dim);
  mix(povm.locality);
  for (const auto& m : povm.elements)
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      for (Eigen::Index i = 0; i < m.rows(); ++i) {
        mix(m(i, j).real());
        mix(m(i, j).imag());
      }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf);
}

}  // namespace qig
