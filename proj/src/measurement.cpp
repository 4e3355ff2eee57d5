#include "qig/measurement.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "qig/errors.hpp"

namespace qig {

namespace {

constexpr double kProbabilityFloor = 1e-12;

struct SearchContext {
  DensityMatrix rho_p;
  std::vector<CMat> tangent_p;  // derivatives of rho^p
  RMat gamma_weight;            // (p F_Q)^{-1} for the gamma objective
  RMat w;                       // weight for the covariance objective
  int n = 0;
  int dim = 0;  // d^p
  int outcomes = 0;
  bool covariance_mode = false;
};

struct Evaluation {
  double value = 0.0;
  bool valid = false;
  RMat probs_q;  // (K x (n+1)): p_a and q_ja per outcome
};

// p_a = <B_a, (V rho)_a>, q_ja = <B_a, (V drho_j)_a>; one big GEMM per
// operator keeps the inner loop cache friendly.
Evaluation evaluate_isometry(const SearchContext& ctx, const CMat& v,
                             std::vector<CMat>* products) {
  const int n = ctx.n, dim = ctx.dim;
  const int k = static_cast<int>(v.rows()) / dim;
  std::vector<CMat> prods;
  prods.reserve(n + 1);
  prods.push_back(v * ctx.rho_p.op);
  for (int j = 0; j < n; ++j) prods.push_back(v * ctx.tangent_p[j]);

  Evaluation out;
  out.probs_q = RMat::Zero(k, n + 1);
  for (int a = 0; a < k; ++a) {
    const auto block = v.middleRows(static_cast<Eigen::Index>(a) * dim, dim);
    for (int c = 0; c <= n; ++c)
      out.probs_q(a, c) =
          block.cwiseProduct(
                   prods[c].middleRows(static_cast<Eigen::Index>(a) * dim, dim)
                       .conjugate())
              .sum()
              .real();
  }

  if (ctx.covariance_mode) {
    RMat fc = RMat::Zero(n, n);
    for (int a = 0; a < k; ++a) {
      const double p = out.probs_q(a, 0);
      if (p < kProbabilityFloor) continue;
      const RVec q = out.probs_q.row(a).tail(n).transpose();
      fc += (q * q.transpose()) / p;
    }
    try {
      out.value = -(ctx.w * spd_inverse(fc)).trace();
      out.valid = std::isfinite(out.value);
    } catch (const SingularMetricError&) {
      out.valid = false;
    }
  } else {
    double acc = 0.0;
    for (int a = 0; a < k; ++a) {
      const double p = out.probs_q(a, 0);
      if (p < kProbabilityFloor) continue;
      const RVec q = out.probs_q.row(a).tail(n).transpose();
      acc += q.dot(ctx.gamma_weight * q) / p;
    }
    out.value = acc;
    out.valid = std::isfinite(acc);
  }
  if (products) *products = std::move(prods);
  return out;
}

// Euclidean gradient wrt the isometry entries: per outcome
// H_a = (2/p_a) sum_j (Lam q_a)_j drho_j - (q_a^T Lam q_a / p_a^2) rho_p and
// grad_a = 2 B_a H_a, assembled from the precomputed V*op products.
CMat isometry_gradient(const SearchContext& ctx, const CMat& v,
                       const Evaluation& eval,
                       const std::vector<CMat>& products) {
  const int n = ctx.n, dim = ctx.dim;
  const int k = static_cast<int>(v.rows()) / dim;
  RMat lam = ctx.gamma_weight;
  if (ctx.covariance_mode) {
    RMat fc = RMat::Zero(n, n);
    for (int a = 0; a < k; ++a) {
      const double p = eval.probs_q(a, 0);
      if (p < kProbabilityFloor) continue;
      const RVec q = eval.probs_q.row(a).tail(n).transpose();
      fc += (q * q.transpose()) / p;
    }
    const RMat fc_inv = spd_inverse(fc);
    lam = fc_inv * ctx.w * fc_inv;
  }
  CMat grad = CMat::Zero(v.rows(), v.cols());
  for (int a = 0; a < k; ++a) {
    const double p = eval.probs_q(a, 0);
    if (p < kProbabilityFloor) continue;
    const RVec q = eval.probs_q.row(a).tail(n).transpose();
    const RVec lam_q = lam * q;
    const double quad = q.dot(lam_q);
    const Eigen::Index row0 = static_cast<Eigen::Index>(a) * dim;
    auto gblock = grad.middleRows(row0, dim);
    for (int j = 0; j < n; ++j)
      gblock += (2.0 * 2.0 * lam_q[j] / p) *
                products[j + 1].middleRows(row0, dim);
    gblock -= (2.0 * quad / (p * p)) * products[0].middleRows(row0, dim);
  }
  return grad;
}

CMat stiefel_tangent(const CMat& v, const CMat& grad) {
  const CMat vg = v.adjoint() * grad;
  return grad - v * (0.5 * (vg + vg.adjoint()));
}

struct RestartOutcome {
  CMat v;
  double value = -std::numeric_limits<double>::infinity();
  bool valid = false;
  int iterations = 0;
};

RestartOutcome ascend(const SearchContext& ctx, CMat v, int max_iters) {
  RestartOutcome out;
  std::vector<CMat> products;
  Evaluation eval = evaluate_isometry(ctx, v, &products);
  if (!eval.valid) return out;
  double step = 1.0;
  int it = 0;
  for (; it < max_iters; ++it) {
    const CMat grad = isometry_gradient(ctx, v, eval, products);
    const CMat xi = stiefel_tangent(v, grad);
    const double xi_norm2 = xi.squaredNorm();
    if (xi_norm2 <= 1e-18 * std::max(1.0, eval.value * eval.value)) break;
    bool accepted = false;
    double t = step;
    while (t > 1e-14) {
      const CMat v_try = orthonormalize(v + t * xi);
      std::vector<CMat> products_try;
      const Evaluation eval_try = evaluate_isometry(ctx, v_try, &products_try);
      if (eval_try.valid &&
          eval_try.value > eval.value + 1e-4 * t * xi_norm2) {
        v = v_try;
        eval = eval_try;
        products = std::move(products_try);
        step = std::min(t * 2.0, 1e3);
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) break;
  }
  out.v = std::move(v);
  out.value = eval.value;
  out.valid = eval.valid;
  out.iterations = it;
  return out;
}

Povm isometry_to_povm(const CMat& v, int dim, int locality) {
  std::vector<CMat> elements;
  const int k = static_cast<int>(v.rows() / dim);
  elements.reserve(k);
  for (int a = 0; a < k; ++a) {
    const CMat block = v.middleRows(static_cast<Eigen::Index>(a) * dim, dim);
    elements.push_back(block.adjoint() * block);
  }
  return Povm::from_elements(std::move(elements), locality);
}

// Pads a POVM's isometry with zero blocks up to K outcomes; zero elements
// are valid and give the search room to move.
CMat padded_isometry(const Povm& povm, int target_outcomes) {
  const CMat base = povm_isometry(povm);
  if (povm.outcomes() >= target_outcomes) return base;
  CMat padded = CMat::Zero(
      static_cast<Eigen::Index>(target_outcomes) * povm.dim, povm.dim);
  padded.topRows(base.rows()) = base;
  return padded;
}

SearchContext make_context(const StateModel& model, const RVec& x, int p,
                           bool covariance_mode, const RMat& w, int outcomes) {
  const DensityMatrix rho = evaluate(model, x);
  const auto tan = tangent(model, x);
  const SLDSet set = slds(rho, tan);
  const FisherMatrix fq = qfim(rho, set);

  SearchContext ctx;
  ctx.rho_p = tensor_power_state(rho, p);
  ctx.tangent_p = tensor_tangent(rho, tan, p);
  ctx.n = model.n;
  ctx.dim = ctx.rho_p.dim;
  ctx.covariance_mode = covariance_mode;
  if (covariance_mode) {
    if (w.rows() != model.n || w.cols() != model.n)
      throw InvalidInputError("optimize_cov: weight shape mismatch");
    if (min_eig_sym(w) < -1e-9)
      throw InvalidInputError("optimize_cov: weight is not PSD");
    ctx.w = 0.5 * (w + w.transpose());
  } else {
    ctx.gamma_weight = spd_inverse(static_cast<double>(p) * fq.m);
  }
  ctx.outcomes = outcomes > 0 ? outcomes : ctx.dim * ctx.dim;
  if (ctx.outcomes < 2)
    throw InvalidInputError("optimizer needs at least two outcomes");
  return ctx;
}

// Informed starting POVMs: SLD-eigenbasis measurements (optimal for single
// parameters, exact for commuting families) and their equal-weight union.
std::vector<Povm> informed_starts(const StateModel& model, const RVec& x,
                                  int p) {
  const DensityMatrix rho = evaluate(model, x);
  const auto tan = tangent(model, x);
  const SLDSet set = slds(rho, tan);
  std::vector<Povm> starts;
  const Povm first = sld_eigenbasis_povm(rho, set.ops[0]);
  starts.push_back(product_power(first, p));
  if (model.n > 1) {
    std::vector<CMat> mixed;
    for (const auto& l : set.ops) {
      const Povm proj = sld_eigenbasis_povm(rho, l);
      for (const auto& m : proj.elements)
        mixed.push_back(m / static_cast<double>(model.n));
    }
    starts.push_back(product_power(Povm::from_elements(std::move(mixed), 1), p));
  }
  return starts;
}

}  // namespace

double gamma_of(const StateModel& model, const RVec& x, const Povm& povm) {
  const DensityMatrix rho = evaluate(model, x);
  const auto tan = tangent(model, x);
  const int p = povm.locality;
  const DensityMatrix rho_p = tensor_power_state(rho, p);
  if (povm.dim != rho_p.dim)
    throw InvalidInputError("gamma_of: POVM dimension " +
                            std::to_string(povm.dim) +
                            " does not match d^p = " +
                            std::to_string(rho_p.dim));
  const FisherMatrix fq = qfim(rho, slds(rho, tan));
  const FisherMatrix fcp = cfim(rho_p, tensor_tangent(rho, tan, p), povm);
  const RMat weight = spd_inverse(static_cast<double>(p) * fq.m);
  return (weight * fcp.m).trace();
}

GammaResult optimize_gamma(const StateModel& model, const RVec& x, int p,
                           const OptimizeOptions& opts) {
  const SearchContext ctx =
      make_context(model, x, p, false, RMat(), opts.outcomes);

  std::vector<CMat> starts;
  if (opts.warm_start) {
    Povm warm = *opts.warm_start;
    if (warm.locality != p) {
      if (warm.locality != 1)
        throw InvalidInputError(
            "optimize_gamma: warm start must be 1-local or p-local");
      warm = product_power(warm, p);
    }
    if (warm.dim != ctx.dim)
      throw InvalidInputError("optimize_gamma: warm start dimension mismatch");
    starts.push_back(padded_isometry(warm, ctx.outcomes));
  }
  if (opts.informed_starts)
    for (const auto& povm : informed_starts(model, x, p))
      starts.push_back(padded_isometry(povm, ctx.outcomes));

  GammaResult result;
  result.seed = opts.seed;
  bool have = false;
  RestartOutcome best;
  for (int r = 0; r < std::max(1, opts.restarts); ++r) {
    CMat v0;
    if (r < static_cast<int>(starts.size())) {
      v0 = starts[r];
    } else {
      Rng rng(derive_seed(opts.seed, r));
      v0 = orthonormalize(
          random_gaussian(ctx.outcomes * ctx.dim, ctx.dim, rng));
    }
    RestartOutcome out = ascend(ctx, std::move(v0), opts.iters);
    result.iterations += out.iterations;
    result.restart_values.push_back(out.valid
                                        ? out.value
                                        : std::numeric_limits<double>::quiet_NaN());
    if (out.valid && (!have || out.value > best.value)) {
      best = std::move(out);
      have = true;
    }
  }
  if (!have)
    throw SearchError("optimize_gamma: every restart failed to produce a "
                      "finite objective");
  result.gamma = best.value;
  result.best_povm = isometry_to_povm(best.v, ctx.dim, p);
  return result;
}

CovSearchResult optimize_cov(const StateModel& model, const RVec& x, int p,
                             const RMat& w, const OptimizeOptions& opts) {
  const SearchContext ctx = make_context(model, x, p, true, w, opts.outcomes);

  std::vector<CMat> starts;
  if (opts.warm_start) {
    Povm warm = *opts.warm_start;
    if (warm.locality != p && warm.locality == 1)
      warm = product_power(warm, p);
    if (warm.dim != ctx.dim)
      throw InvalidInputError("optimize_cov: warm start dimension mismatch");
    starts.push_back(padded_isometry(warm, ctx.outcomes));
  }
  if (opts.informed_starts)
    for (const auto& povm : informed_starts(model, x, p))
      starts.push_back(padded_isometry(povm, ctx.outcomes));

  CovSearchResult result;
  result.seed = opts.seed;
  bool have = false;
  RestartOutcome best;
  for (int r = 0; r < std::max(1, opts.restarts); ++r) {
    CMat v0;
    if (r < static_cast<int>(starts.size())) {
      v0 = starts[r];
    } else {
      Rng rng(derive_seed(opts.seed, r));
      v0 = orthonormalize(
          random_gaussian(ctx.outcomes * ctx.dim, ctx.dim, rng));
    }
    RestartOutcome out = ascend(ctx, std::move(v0), opts.iters);
    result.restart_values.push_back(out.valid
                                        ? -out.value
                                        : std::numeric_limits<double>::quiet_NaN());
    if (out.valid && (!have || out.value > best.value)) {
      best = std::move(out);
      have = true;
    }
  }
  if (!have)
    throw SearchError("optimize_cov: every restart failed (singular CFIM on "
                      "all starts)");
  result.value = -best.value;
  result.best_povm = isometry_to_povm(best.v, ctx.dim, p);
  return result;
}

}  // namespace qig
