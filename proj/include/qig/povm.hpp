#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qig/models.hpp"
#include "qig/numlin.hpp"

namespace qig {

// A set {M_alpha} with M_alpha >= 0 and sum_alpha M_alpha = I, acting on a
// d^p-dimensional space.
struct Povm {
  int dim = 0;       // d^p
  int locality = 1;  // p
  std::vector<CMat> elements;

  int outcomes() const { return static_cast<int>(elements.size()); }

  // Validates Hermiticity, PSD within -1e-9 and completeness within 1e-8.
  static Povm from_elements(std::vector<CMat> elements, int locality = 1);
};

// POVM built from a random isometry C^dim -> C^(K*dim); completeness holds
// to orthonormalization accuracy (~1e-14), elements are PSD by construction.
Povm random_povm(int dim, int outcomes, std::uint64_t seed, int locality = 1);

// Rank-1 orthogonal projectors onto the columns of a random unitary.
Povm random_projective_povm(int dim, std::uint64_t seed, int locality = 1);

// Projective measurement on the eigenvectors of an SLD; saturates the
// quantum Cramer-Rao bound for single-parameter families.
Povm sld_eigenbasis_povm(const DensityMatrix& rho, const CMat& sld_op);

// {M_a1 (x) ... (x) M_ap}: the p-fold product POVM of a 1-local base.
Povm product_power(const Povm& base, int p);

// Stacked sqrt(M_alpha) blocks: a (K*dim) x dim isometry V with
// M_alpha = V_alpha^dag V_alpha. Used to seed warm starts in the searches.
CMat povm_isometry(const Povm& povm);

// FNV-1a hash of the element bytes; stable identifier for reports.
std::string povm_digest(const Povm& povm);

}  // namespace qig
