#include "qig/models.hpp"

#include <cmath>

#include "qig/errors.hpp"

namespace qig {

namespace {

constexpr double kTraceTol = 1e-10;
constexpr double kEigFloor = -1e-10;
constexpr double kTracelessTol = 1e-8;
constexpr double kFdStepScale = 1e-5;

const CMat& pauli(int k) {
  static const CMat sx = [] {
    CMat m(2, 2);
    m << 0, 1, 1, 0;
    return m;
  }();
  static const CMat sy = [] {
    CMat m(2, 2);
    m << Complex(0, 0), Complex(0, -1), Complex(0, 1), Complex(0, 0);
    return m;
  }();
  static const CMat sz = [] {
    CMat m(2, 2);
    m << 1, 0, 0, -1;
    return m;
  }();
  switch (k) {
    case 0: return sx;
    case 1: return sy;
    default: return sz;
  }
}

// exp(-i theta n.sigma / 2) in closed form.
CMat qubit_rotation(double theta, double nx, double ny, double nz) {
  const double c = std::cos(theta / 2.0);
  const double s = std::sin(theta / 2.0);
  CMat u = c * CMat::Identity(2, 2);
  u -= Complex(0, s) * (nx * pauli(0) + ny * pauli(1) + nz * pauli(2));
  return u;
}

CVec bloch_ket(double theta, double phi) {
  CVec psi(2);
  psi << Complex(std::cos(theta / 2.0), 0.0),
      std::exp(Complex(0.0, phi)) * std::sin(theta / 2.0);
  return psi;
}

std::vector<CMat> pure_qubit_tangent(const RVec& x) {
  const double theta = x[0], phi = x[1];
  const CVec psi = bloch_ket(theta, phi);
  CVec dtheta(2), dphi(2);
  dtheta << Complex(-0.5 * std::sin(theta / 2.0), 0.0),
      0.5 * std::cos(theta / 2.0) * std::exp(Complex(0.0, phi));
  dphi << Complex(0.0, 0.0),
      Complex(0.0, 1.0) * std::sin(theta / 2.0) * std::exp(Complex(0.0, phi));
  const CMat d1 = dtheta * psi.adjoint() + psi * dtheta.adjoint();
  const CMat d2 = dphi * psi.adjoint() + psi * dphi.adjoint();
  return {d1, d2};
}

}  // namespace

DensityMatrix DensityMatrix::from_matrix(const CMat& rho) {
  const CMat h = hermitize(rho, 1e-10);
  const double tr_dev = std::abs(h.trace().real() - 1.0) +
                        std::abs(h.trace().imag());
  if (tr_dev > kTraceTol)
    throw InvalidInputError("density matrix trace deviates from 1 by " +
                            std::to_string(tr_dev));
  EigSystem es = eig_hermitian(h);
  const double wmax = es.eigenvalues.maxCoeff();
  if (es.eigenvalues.minCoeff() < kEigFloor * std::max(1.0, wmax))
    throw NotPsdError("density matrix has negative eigenvalue " +
                      std::to_string(es.eigenvalues.minCoeff()));
  DensityMatrix dm;
  dm.dim = static_cast<int>(h.rows());
  dm.op = h;
  dm.eigenvalues = es.eigenvalues.cwiseMax(0.0);
  dm.eigenvectors = es.eigenvectors;
  dm.support_tol = 1e-10 * wmax;
  dm.support_rank = 0;
  for (Eigen::Index i = 0; i < dm.eigenvalues.size(); ++i)
    if (dm.eigenvalues[i] > dm.support_tol) ++dm.support_rank;
  return dm;
}

void check_domain(const StateModel& model, const RVec& x, double margin) {
  if (x.size() != model.n)
    throw DomainError(model.name + ": expected " + std::to_string(model.n) +
                      " parameters, got " + std::to_string(x.size()));
  for (int j = 0; j < model.n; ++j) {
    const Interval& iv = model.domain[j];
    if (!(x[j] > iv.lo + margin && x[j] < iv.hi - margin))
      throw DomainError(model.name + ": parameter " + std::to_string(j + 1) +
                        " = " + std::to_string(x[j]) + " outside (" +
                        std::to_string(iv.lo) + ", " + std::to_string(iv.hi) +
                        ")" + (margin > 0 ? " with margin" : ""));
  }
  if (model.joint_constraint) {
    const std::string problem = model.joint_constraint(x);
    if (!problem.empty()) throw DomainError(model.name + ": " + problem);
  }
}

DensityMatrix evaluate(const StateModel& model, const RVec& x) {
  check_domain(model, x);
  return DensityMatrix::from_matrix(model.evaluate_raw(x));
}

std::vector<CMat> tangent(const StateModel& model, const RVec& x,
                          const TangentOptions& opts) {
  check_domain(model, x);
  std::vector<CMat> out;
  if (model.analytic_tangent) {
    out = model.analytic_tangent(x);
    for (auto& t : out) t = hermitize(t, 1e-10);
  } else {
    out.reserve(model.n);
    const auto central = [&](int j, double h) {
      RVec xp = x, xm = x;
      xp[j] += h;
      xm[j] -= h;
      check_domain(model, xp);
      check_domain(model, xm);
      return ((model.evaluate_raw(xp) - model.evaluate_raw(xm)) / (2.0 * h))
          .eval();
    };
    for (int j = 0; j < model.n; ++j) {
      const double h = kFdStepScale * std::max(1.0, std::abs(x[j]));
      CMat d = central(j, h);
      if (opts.richardson) d = (4.0 * central(j, h / 2.0) - d) / 3.0;
      out.push_back(hermitize(d, 1e-8));
    }
  }
  for (int j = 0; j < model.n; ++j) {
    const double tr = std::abs(out[j].trace());
    if (tr > kTracelessTol)
      throw InvalidInputError(model.name + ": tangent " + std::to_string(j) +
                              " has trace " + std::to_string(tr));
  }
  return out;
}

StateModel make_pure_qubit() {
  StateModel m;
  m.name = "pure_qubit";
  m.n = 2;
  m.d = 2;
  m.domain = {{0.0, M_PI}, {-M_PI, M_PI}};
  m.evaluate_raw = [](const RVec& x) {
    const CVec psi = bloch_ket(x[0], x[1]);
    return (psi * psi.adjoint()).eval();
  };
  m.analytic_tangent = pure_qubit_tangent;
  return m;
}

StateModel make_noisy_qubit(double eta) {
  if (!(eta > 0.0 && eta < 1.0))
    throw InvalidInputError("noisy_qubit: eta must be in (0, 1)");
  StateModel m;
  m.name = "noisy_qubit";
  m.n = 2;
  m.d = 2;
  m.domain = {{0.0, M_PI}, {-M_PI, M_PI}};
  m.evaluate_raw = [eta](const RVec& x) {
    const CVec psi = bloch_ket(x[0], x[1]);
    return (eta * (psi * psi.adjoint()) +
            (1.0 - eta) * 0.5 * CMat::Identity(2, 2))
        .eval();
  };
  m.analytic_tangent = [eta](const RVec& x) {
    auto base = pure_qubit_tangent(x);
    for (auto& t : base) t *= eta;
    return base;
  };
  return m;
}

StateModel make_bloch_3p() {
  StateModel m;
  m.name = "bloch_3p";
  m.n = 3;
  m.d = 2;
  // Componentwise box inside the Bloch ball: |r| <= sqrt(3) * 0.577 < 1.
  m.domain = {{-0.577, 0.577}, {-0.577, 0.577}, {-0.577, 0.577}};
  m.evaluate_raw = [](const RVec& x) {
    CMat rho = 0.5 * CMat::Identity(2, 2);
    for (int k = 0; k < 3; ++k) rho += 0.5 * x[k] * pauli(k);
    return rho;
  };
  m.analytic_tangent = [](const RVec&) {
    return std::vector<CMat>{0.5 * pauli(0), 0.5 * pauli(1), 0.5 * pauli(2)};
  };
  return m;
}

StateModel make_classical_2p() {
  StateModel m;
  m.name = "classical_2p";
  m.n = 2;
  m.d = 3;
  // Kept away from singular support so the SLDs stay bounded.
  m.domain = {{0.01, 0.99}, {0.01, 0.99}};
  m.joint_constraint = [](const RVec& x) {
    return x[0] + x[1] < 0.99
               ? std::string()
               : "x1 + x2 = " + std::to_string(x[0] + x[1]) +
                     " violates x1 + x2 < 0.99";
  };
  m.evaluate_raw = [](const RVec& x) {
    CMat rho = CMat::Zero(3, 3);
    rho(0, 0) = x[0];
    rho(1, 1) = x[1];
    rho(2, 2) = 1.0 - x[0] - x[1];
    return rho;
  };
  m.analytic_tangent = [](const RVec&) {
    CMat d1 = CMat::Zero(3, 3), d2 = CMat::Zero(3, 3);
    d1(0, 0) = 1.0;
    d1(2, 2) = -1.0;
    d2(1, 1) = 1.0;
    d2(2, 2) = -1.0;
    return std::vector<CMat>{d1, d2};
  };
  return m;
}

namespace {

CMat unitary_2p_rho0() {
  CMat rho0 = CMat::Zero(2, 2);
  rho0(0, 0) = 0.85;
  rho0(1, 1) = 0.15;
  return rho0;
}

CMat unitary_2p_state(const RVec& x) {
  const CMat u1 = qubit_rotation(x[0], 1, 0, 0);
  const CMat u2 = qubit_rotation(x[1], 0, 1, 0);
  return u2 * u1 * unitary_2p_rho0() * u1.adjoint() * u2.adjoint();
}

std::vector<CMat> unitary_2p_tangent(const RVec& x) {
  const CMat u1 = qubit_rotation(x[0], 1, 0, 0);
  const CMat u2 = qubit_rotation(x[1], 0, 1, 0);
  const CMat g1 = 0.5 * pauli(0);
  const CMat g2 = 0.5 * pauli(1);
  const CMat rho1 = u1 * unitary_2p_rho0() * u1.adjoint();
  const CMat rho = u2 * rho1 * u2.adjoint();
  const Complex mi(0.0, -1.0);
  const CMat d1 = u2 * (mi * commutator(g1, rho1)) * u2.adjoint();
  const CMat d2 = mi * commutator(g2, rho);
  return {d1, d2};
}

}  // namespace

StateModel make_unitary_2p() {
  StateModel m;
  m.name = "unitary_2p";
  m.n = 2;
  m.d = 2;
  m.domain = {{-M_PI, M_PI}, {-M_PI, M_PI}};
  m.evaluate_raw = unitary_2p_state;
  m.analytic_tangent = unitary_2p_tangent;
  return m;
}

StateModel make_classical_coin() {
  StateModel m;
  m.name = "classical_coin";
  m.n = 1;
  m.d = 2;
  m.domain = {{0.01, 0.99}};
  m.evaluate_raw = [](const RVec& x) {
    CMat rho = CMat::Zero(2, 2);
    rho(0, 0) = x[0];
    rho(1, 1) = 1.0 - x[0];
    return rho;
  };
  m.analytic_tangent = [](const RVec&) {
    CMat d = CMat::Zero(2, 2);
    d(0, 0) = 1.0;
    d(1, 1) = -1.0;
    return std::vector<CMat>{d};
  };
  return m;
}

StateModel make_conjugate_pair() {
  StateModel m;
  m.name = "conjugate_pair";
  m.n = 2;
  m.d = 4;
  m.domain = {{-M_PI, M_PI}, {-M_PI, M_PI}};
  const auto embed = [](const CMat& a, const CMat& b) {
    CMat out = CMat::Zero(4, 4);
    out.block(0, 0, 2, 2) = a;
    out.block(2, 2, 2, 2) = b;
    return out;
  };
  m.evaluate_raw = [embed](const RVec& x) {
    const CMat rho = unitary_2p_state(x);
    return embed(0.5 * rho, 0.5 * rho.conjugate());
  };
  m.analytic_tangent = [embed](const RVec& x) {
    auto base = unitary_2p_tangent(x);
    std::vector<CMat> out;
    out.reserve(base.size());
    for (const auto& t : base)
      out.push_back(embed(0.5 * t, 0.5 * t.conjugate()));
    return out;
  };
  return m;
}

StateModel make_qubit_line(std::uint64_t seed) {
  Rng rng(seed);
  RVec r0(3), v(3);
  for (int k = 0; k < 3; ++k) r0[k] = rng.normal();
  r0 *= 0.5 / std::max(1.0, r0.norm());
  for (int k = 0; k < 3; ++k) v[k] = rng.normal();
  v /= std::max(1.0, v.norm());
  StateModel m;
  m.name = "qubit_line_" + std::to_string(seed);
  m.n = 1;
  m.d = 2;
  m.domain = {{-0.2, 0.2}};
  m.evaluate_raw = [r0, v](const RVec& x) {
    CMat rho = 0.5 * CMat::Identity(2, 2);
    for (int k = 0; k < 3; ++k)
      rho += 0.5 * (r0[k] + x[0] * v[k]) * pauli(k);
    return rho;
  };
  m.analytic_tangent = [v](const RVec&) {
    CMat d = CMat::Zero(2, 2);
    for (int k = 0; k < 3; ++k) d += 0.5 * v[k] * pauli(k);
    return std::vector<CMat>{d};
  };
  return m;
}

const std::vector<StateModel>& registry() {
  static const std::vector<StateModel> models = {
      make_pure_qubit(), make_noisy_qubit(), make_bloch_3p(),
      make_classical_2p(), make_unitary_2p()};
  return models;
}

const StateModel& lookup_model(const std::string& name) {
  for (const auto& m : registry())
    if (m.name == name) return m;
  std::string known;
  for (const auto& m : registry()) {
    if (!known.empty()) known += ", ";
    known += m.name;
  }
  throw NotFoundError("unknown model '" + name + "'; registry: " + known);
}

}  // namespace qig
