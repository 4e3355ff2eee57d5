#include "qig/bounds_convex.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <limits>

#include "qig/errors.hpp"

namespace qig {

namespace {

constexpr double kUnbiasedTol = 1e-6;
constexpr double kFrameTol = 1e-8;
constexpr double kProbabilityFloor = 1e-12;

// Smoothed nuclear norm sum_i (sqrt(s_i^2 + mu^2) - mu) with its gradient
// U f'(S) V^dag; mu = 0 gives the exact trace norm.
template <typename Mat>
double smoothed_nuclear(const Mat& s, double mu, Mat* grad) {
  Eigen::JacobiSVD<Mat> svd(
      s, grad ? Eigen::ComputeThinU | Eigen::ComputeThinV : 0);
  double value = 0.0;
  const auto& sv = svd.singularValues();
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    value += std::sqrt(sv[i] * sv[i] + mu * mu) - mu;
  if (grad) {
    Eigen::VectorXd scale(sv.size());
    for (Eigen::Index i = 0; i < sv.size(); ++i)
      scale[i] = sv[i] / std::sqrt(sv[i] * sv[i] + mu * mu);
    *grad = svd.matrixU() * scale.asDiagonal() * svd.matrixV().adjoint();
  }
  return value;
}

// Objective interface over the affine space; gradients are reported as
// operators G_l with d obj = Re Tr(N G_l) for a perturbation N of X_l.
struct Objective {
  virtual ~Objective() = default;
  virtual double value(const std::vector<CMat>& x, double mu) const = 0;
  virtual double value_grad(const std::vector<CMat>& x, double mu,
                            std::vector<CMat>& g_ops) const = 0;
};

// Tr[W Abar_Re] + ||sqrt(W) Abar_Im sqrt(W)||_1 with
// Abar_jk = Tr(q0 X_j X_k) + Tr(q1 X_k X_j); q0 + q1 = rho. The Holevo
// functional is the q1 = 0 case.
struct MaskedFrameObjective : Objective {
  CMat q0, q1;
  RMat w, w_root;
  int n = 0;

  CMat abar(const std::vector<CMat>& x) const {
    CMat a(n, n);
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        a(j, k) = (q0 * x[j] * x[k]).trace() + (q1 * x[k] * x[j]).trace();
    return a;
  }

  double value(const std::vector<CMat>& x, double mu) const override {
    const CMat a = abar(x);
    const RMat s = w_root * a.imag() * w_root;
    return (w.cwiseProduct(a.real())).sum() + smoothed_nuclear(s, mu, (RMat*)nullptr);
  }

  double value_grad(const std::vector<CMat>& x, double mu,
                    std::vector<CMat>& g_ops) const override {
    const CMat a = abar(x);
    const RMat s = w_root * a.imag() * w_root;
    RMat ngrad;
    const double val =
        (w.cwiseProduct(a.real())).sum() + smoothed_nuclear(s, mu, &ngrad);
    const RMat v = w_root * ngrad * w_root;
    const CMat omega = w.cast<Complex>() - Complex(0, 1) * v.cast<Complex>();
    g_ops.assign(n, CMat());
    for (int l = 0; l < n; ++l) {
      CMat g = CMat::Zero(x[0].rows(), x[0].cols());
      for (int k = 0; k < n; ++k) {
        g += omega(l, k) * (x[k] * q0 + q1 * x[k]);
        g += omega(k, l) * (q0 * x[k] + x[k] * q1);
      }
      g_ops[l] = std::move(g);
    }
    return val;
  }
};

// Tr(rho X_1^2) + Tr(rho X_2^2) + ||sqrt(rho) [X_1, X_2] sqrt(rho)||_1.
struct NagaokaObjective : Objective {
  CMat rho, root;

  double value(const std::vector<CMat>& x, double mu) const override {
    const CMat s = root * commutator(x[0], x[1]) * root;
    return (rho * (x[0] * x[0] + x[1] * x[1])).trace().real() +
           smoothed_nuclear(s, mu, (CMat*)nullptr);
  }

  double value_grad(const std::vector<CMat>& x, double mu,
                    std::vector<CMat>& g_ops) const override {
    const CMat s = root * commutator(x[0], x[1]) * root;
    CMat ngrad;
    const double val =
        (rho * (x[0] * x[0] + x[1] * x[1])).trace().real() +
        smoothed_nuclear(s, mu, &ngrad);
    const CMat m = root * ngrad.adjoint() * root;
    g_ops.assign(2, CMat());
    g_ops[0] = x[0] * rho + rho * x[0] + commutator(x[1], m);
    g_ops[1] = x[1] * rho + rho * x[1] + commutator(m, x[0]);
    return val;
  }
};

RVec objective_gradient(const Objective& obj, const UnbiasedSpace& space,
                        const RVec& t, double mu, double* value) {
  const std::vector<CMat> x = space.point(t);
  std::vector<CMat> g_ops;
  const double v = obj.value_grad(x, mu, g_ops);
  if (value) *value = v;
  const int h = space.homogeneous_dim();
  RVec grad(space.n * h);
  for (int l = 0; l < space.n; ++l)
    for (int b = 0; b < h; ++b)
      grad[l * h + b] = (space.null_basis[b] * g_ops[l]).trace().real();
  return grad;
}

struct StageOutcome {
  RVec t;
  double value = 0.0;
  double grad_norm = 0.0;
  int iterations = 0;
};

// Dense BFGS with Armijo backtracking on the smoothed objective.
StageOutcome bfgs_stage(const Objective& obj, const UnbiasedSpace& space,
                        RVec t, double mu, int max_iters) {
  const int dim = static_cast<int>(t.size());
  StageOutcome out;
  double f = 0.0;
  RVec g = objective_gradient(obj, space, t, mu, &f);
  if (dim == 0) {
    out.t = t;
    out.value = f;
    return out;
  }
  RMat hinv = RMat::Identity(dim, dim);
  int it = 0;
  for (; it < max_iters; ++it) {
    if (g.lpNorm<Eigen::Infinity>() <= 1e-10 * std::max(1.0, std::abs(f)))
      break;
    RVec dir = -(hinv * g);
    double slope = g.dot(dir);
    if (slope > 0.0) {  // reset a corrupted approximation
      hinv = RMat::Identity(dim, dim);
      dir = -g;
      slope = g.dot(dir);
    }
    double alpha = 1.0;
    double f_new = 0.0;
    RVec t_new;
    bool accepted = false;
    while (alpha > 1e-16) {
      t_new = t + alpha * dir;
      f_new = obj.value(space.point(t_new), mu);
      if (std::isfinite(f_new) && f_new <= f + 1e-4 * alpha * slope) {
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) break;
    double f_next = 0.0;
    const RVec g_new = objective_gradient(obj, space, t_new, mu, &f_next);
    const RVec s = t_new - t;
    const RVec y = g_new - g;
    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      const RVec hy = hinv * y;
      const double yhy = y.dot(hy);
      hinv += ((sy + yhy) / (sy * sy)) * (s * s.transpose()) -
              (hy * s.transpose() + s * hy.transpose()) / sy;
    }
    t = t_new;
    f = f_new;
    g = g_new;
  }
  out.t = std::move(t);
  out.value = f;
  out.grad_norm = g.lpNorm<Eigen::Infinity>();
  out.iterations = it;
  return out;
}

SolveResult minimize(const Objective& obj, const UnbiasedSpace& space,
                     const SolveOptions& opts) {
  SolveResult best;
  bool have_best = false;
  double scale = 0.0;
  for (const auto& xp : space.particular)
    scale += std::sqrt(std::max(0.0, hs_inner(xp, xp)));
  scale = 0.5 * std::max(1.0, scale / std::max(1, space.n));

  for (int r = 0; r < std::max(1, opts.restarts); ++r) {
    RVec t = RVec::Zero(space.n * space.homogeneous_dim());
    if (r > 0) {
      Rng rng(derive_seed(opts.seed, r));
      for (Eigen::Index i = 0; i < t.size(); ++i)
        t[i] = scale * rng.normal();
    }
    SolveResult res;
    double prev_value = std::numeric_limits<double>::infinity();
    double mu = opts.mu_init;
    for (;;) {
      const StageOutcome stage =
          bfgs_stage(obj, space, t, mu, opts.max_iters);
      t = stage.t;
      res.iterations += stage.iterations;
      res.grad_norm = stage.grad_norm;
      res.final_mu = mu;
      res.stage_change = std::abs(prev_value - stage.value);
      prev_value = stage.value;
      if (res.stage_change < opts.stage_tol && mu <= opts.mu_final) break;
      if (mu <= opts.mu_final) break;
      mu = std::max(opts.mu_final, mu * opts.mu_factor);
    }
    res.value = obj.value(space.point(t), 0.0);
    res.converged = res.stage_change < opts.stage_tol;
    best.restart_values.push_back(res.value);
    if (!have_best || res.value < best.value) {
      const auto saved = best.restart_values;
      best = res;
      best.restart_values = saved;
      have_best = true;
    }
  }
  if (!best.converged)
    throw ConvergenceError(
        "convex solver did not reach stage tolerance; best value " +
            std::to_string(best.value),
        best.value);
  return best;
}

void check_weight(const RMat& w, int n) {
  if (w.rows() != n || w.cols() != n)
    throw InvalidInputError("weight matrix has wrong shape");
  if (min_eig_sym(w) < -1e-9)
    throw InvalidInputError("weight matrix is not PSD");
}

}  // namespace

std::vector<CMat> hermitian_basis(int d) {
  std::vector<CMat> basis;
  basis.reserve(static_cast<std::size_t>(d) * d);
  basis.push_back(CMat::Identity(d, d) / std::sqrt(static_cast<double>(d)));
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  for (int j = 0; j < d; ++j)
    for (int k = j + 1; k < d; ++k) {
      CMat re = CMat::Zero(d, d);
      re(j, k) = inv_sqrt2;
      re(k, j) = inv_sqrt2;
      basis.push_back(re);
      CMat im = CMat::Zero(d, d);
      im(j, k) = Complex(0, -inv_sqrt2);
      im(k, j) = Complex(0, inv_sqrt2);
      basis.push_back(im);
    }
  for (int l = 1; l < d; ++l) {
    CMat diag = CMat::Zero(d, d);
    const double norm = 1.0 / std::sqrt(l * (l + 1.0));
    for (int i = 0; i < l; ++i) diag(i, i) = norm;
    diag(l, l) = -l * norm;
    basis.push_back(diag);
  }
  return basis;
}

std::vector<CMat> UnbiasedSpace::point(const RVec& t) const {
  const int h = homogeneous_dim();
  std::vector<CMat> x = particular;
  for (int j = 0; j < n; ++j)
    for (int b = 0; b < h; ++b)
      if (t[j * h + b] != 0.0) x[j] += t[j * h + b] * null_basis[b];
  return x;
}

UnbiasedSpace unbiased_space(const DensityMatrix& rho,
                             const std::vector<CMat>& tangent_ops) {
  const int n = static_cast<int>(tangent_ops.size());
  const SLDSet set = slds(rho, tangent_ops);
  const FisherMatrix fq = qfim(rho, set);
  RMat fq_inv;
  try {
    fq_inv = spd_inverse(fq.m);
  } catch (const SingularMetricError& e) {
    throw InfeasibleError(std::string("unbiased_space: ") + e.what());
  }

  UnbiasedSpace space;
  space.n = n;
  space.ambient_dim = rho.dim;
  for (int j = 0; j < n; ++j) {
    CMat x = CMat::Zero(rho.dim, rho.dim);
    for (int k = 0; k < n; ++k) x += fq_inv(j, k) * set.ops[k];
    space.particular.push_back(std::move(x));
  }
  // Feasibility of the particular solution.
  for (int j = 0; j < n; ++j) {
    if (std::abs((rho.op * space.particular[j]).trace()) > kUnbiasedTol)
      throw InfeasibleError("unbiased_space: particular solution violates "
                            "Tr(rho X_j) = 0");
    for (int k = 0; k < n; ++k) {
      const double want = j == k ? 1.0 : 0.0;
      if (std::abs((tangent_ops[k] * space.particular[j]).trace().real() -
                   want) > kUnbiasedTol)
        throw InfeasibleError(
            "unbiased_space: particular solution violates the derivative "
            "constraint");
    }
  }

  // Constraint matrix over the Hermitian basis; the same nullspace serves
  // every j.
  const auto basis = hermitian_basis(rho.dim);
  const int dd = static_cast<int>(basis.size());
  RMat constraints(n + 1, dd);
  for (int a = 0; a < dd; ++a) {
    constraints(0, a) = (rho.op * basis[a]).trace().real();
    for (int k = 0; k < n; ++k)
      constraints(k + 1, a) = (tangent_ops[k] * basis[a]).trace().real();
  }
  Eigen::JacobiSVD<RMat> svd(constraints, Eigen::ComputeFullV);
  const double sv_max = svd.singularValues().size()
                            ? svd.singularValues().maxCoeff()
                            : 0.0;
  int rank = 0;
  for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i)
    if (svd.singularValues()[i] > 1e-12 * std::max(1.0, sv_max)) ++rank;
  for (int c = rank; c < dd; ++c) {
    const RVec coeff = svd.matrixV().col(c);
    CMat op = CMat::Zero(rho.dim, rho.dim);
    for (int a = 0; a < dd; ++a)
      if (coeff[a] != 0.0) op += coeff[a] * basis[a];
    space.null_basis.push_back(std::move(op));
  }
  return space;
}

SolveResult holevo_bound(const DensityMatrix& rho,
                         const std::vector<CMat>& tangent_ops, const RMat& w,
                         const SolveOptions& opts) {
  const int n = static_cast<int>(tangent_ops.size());
  check_weight(w, n);
  MaskedFrameObjective obj;
  obj.q0 = rho.op;
  obj.q1 = CMat::Zero(rho.dim, rho.dim);
  obj.w = 0.5 * (w + w.transpose());
  obj.w_root = spd_sqrt(obj.w);
  obj.n = n;
  return minimize(obj, unbiased_space(rho, tangent_ops), opts);
}

SolveResult nagaoka_bound(const DensityMatrix& rho,
                          const std::vector<CMat>& tangent_ops,
                          const SolveOptions& opts) {
  if (tangent_ops.size() != 2)
    throw UnsupportedArityError("nagaoka_bound: defined for n = 2 only");
  NagaokaObjective obj;
  obj.rho = rho.op;
  obj.root = psd_sqrt(rho.op);
  return minimize(obj, unbiased_space(rho, tangent_ops), opts);
}

SolveResult general_framework_bound(const DensityMatrix& rho,
                                    const std::vector<CMat>& tangent_ops,
                                    const RMat& w,
                                    const std::vector<CVec>& u_set,
                                    const std::vector<int>& transpose_mask,
                                    const SolveOptions& opts) {
  const int n = static_cast<int>(tangent_ops.size());
  check_weight(w, n);
  if (u_set.size() != transpose_mask.size())
    throw InvalidFrameError("transpose mask length does not match frame");
  const CMat root = psd_sqrt(rho.op);
  CMat q0 = CMat::Zero(rho.dim, rho.dim);
  CMat q1 = CMat::Zero(rho.dim, rho.dim);
  CMat frame_sum = CMat::Zero(rho.dim, rho.dim);
  for (std::size_t q = 0; q < u_set.size(); ++q) {
    if (u_set[q].size() != rho.dim)
      throw InvalidFrameError("frame vector dimension mismatch");
    frame_sum += u_set[q] * u_set[q].adjoint();
    const CVec wv = root * u_set[q];
    if (transpose_mask[q])
      q1 += wv * wv.adjoint();
    else
      q0 += wv * wv.adjoint();
  }
  if (max_abs(frame_sum - CMat::Identity(rho.dim, rho.dim)) > kFrameTol)
    throw InvalidFrameError("frame does not resolve the identity");
  MaskedFrameObjective obj;
  obj.q0 = std::move(q0);
  obj.q1 = std::move(q1);
  obj.w = 0.5 * (w + w.transpose());
  obj.w_root = spd_sqrt(obj.w);
  obj.n = n;
  return minimize(obj, unbiased_space(rho, tangent_ops), opts);
}

std::vector<CMat> estimator_observables(const Povm& povm, const RMat& est,
                                        const RVec& x) {
  const int n = static_cast<int>(x.size());
  if (est.rows() != povm.outcomes() || est.cols() != n)
    throw InvalidInputError("estimator_observables: estimator shape mismatch");
  std::vector<CMat> ops(n, CMat::Zero(povm.dim, povm.dim));
  for (int a = 0; a < povm.outcomes(); ++a)
    for (int j = 0; j < n; ++j)
      ops[j] += (est(a, j) - x[j]) * povm.elements[a];
  return ops;
}

RMat natural_estimator(const DensityMatrix& rho,
                       const std::vector<CMat>& tangent_ops, const Povm& povm,
                       const RVec& x) {
  const int n = static_cast<int>(tangent_ops.size());
  const FisherMatrix fc = cfim(rho, tangent_ops, povm);
  RMat fc_inv;
  try {
    fc_inv = spd_inverse(fc.m);
  } catch (const SingularMetricError& e) {
    throw InfeasibleError(std::string("natural_estimator: CFIM singular: ") +
                          e.what());
  }
  RMat est(povm.outcomes(), n);
  for (int a = 0; a < povm.outcomes(); ++a) {
    const double p = (rho.op * povm.elements[a]).trace().real();
    for (int j = 0; j < n; ++j) {
      double shift = 0.0;
      if (p > kProbabilityFloor) {
        for (int k = 0; k < n; ++k)
          shift += fc_inv(j, k) *
                   (tangent_ops[k] * povm.elements[a]).trace().real() / p;
      }
      est(a, j) = x[j] + shift;
    }
  }
  return est;
}

RMat cov_u_matrix(const DensityMatrix& rho, const Povm& povm, const RMat& est,
                  const RVec& x, const CVec& u) {
  const int n = static_cast<int>(x.size());
  const CMat root = psd_sqrt(rho.op);
  const CVec w = root * u;
  RMat cov = RMat::Zero(n, n);
  for (int a = 0; a < povm.outcomes(); ++a) {
    const double weight = (w.adjoint() * povm.elements[a] * w)(0, 0).real();
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        cov(j, k) += (est(a, j) - x[j]) * (est(a, k) - x[k]) * weight;
  }
  return cov;
}

CMat a_u_matrix(const DensityMatrix& rho, const std::vector<CMat>& x_ops,
                const CVec& u) {
  const int n = static_cast<int>(x_ops.size());
  const CMat root = psd_sqrt(rho.op);
  const CVec w = root * u;
  CMat ys(rho.dim, n);
  for (int j = 0; j < n; ++j) ys.col(j) = x_ops[j] * w;
  return ys.adjoint() * ys;
}

RMat estimator_covariance(const DensityMatrix& rho, const Povm& povm,
                          const RMat& est, const RVec& x) {
  const int n = static_cast<int>(x.size());
  RMat cov = RMat::Zero(n, n);
  for (int a = 0; a < povm.outcomes(); ++a) {
    const double p = (rho.op * povm.elements[a]).trace().real();
    if (p <= 0.0) continue;
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        cov(j, k) += p * (est(a, j) - x[j]) * (est(a, k) - x[k]);
  }
  return cov;
}

DominanceResult verify_dominance(const DensityMatrix& rho,
                                 const std::vector<CMat>& tangent_ops,
                                 const Povm& povm, const RMat& est,
                                 const RVec& x, const CVec& u) {
  const int n = static_cast<int>(tangent_ops.size());
  const auto x_ops = estimator_observables(povm, est, x);
  // Locally unbiased preconditions with residual reporting.
  for (int j = 0; j < n; ++j) {
    const double r0 = std::abs((rho.op * x_ops[j]).trace());
    if (r0 > kUnbiasedTol)
      throw PreconditionError(
          "verify_dominance: estimator violates Tr(rho X_" +
          std::to_string(j + 1) + ") = 0 with residual " + std::to_string(r0));
    for (int k = 0; k < n; ++k) {
      const double want = j == k ? 1.0 : 0.0;
      const double resid =
          std::abs((tangent_ops[k] * x_ops[j]).trace().real() - want);
      if (resid > kUnbiasedTol)
        throw PreconditionError(
            "verify_dominance: estimator violates the derivative constraint "
            "(j=" + std::to_string(j + 1) + ", k=" + std::to_string(k + 1) +
            ") with residual " + std::to_string(resid));
    }
  }
  const RMat cov = cov_u_matrix(rho, povm, est, x, u);
  const CMat au = a_u_matrix(rho, x_ops, u);
  DominanceResult out;
  out.min_eig_au = min_eig_herm(cov.cast<Complex>() - au);
  out.min_eig_aut = min_eig_herm(cov.cast<Complex>() - au.transpose());
  return out;
}

}  // namespace qig
