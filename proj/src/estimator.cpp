#include "qig/estimator.hpp"

#include <algorithm>
#include <cmath>

#include "qig/errors.hpp"

namespace qig {

namespace {

constexpr double kProbabilityFloor = 1e-12;

bool domain_contains(const StateModel& model, const RVec& x, double margin) {
  if (x.size() != model.n) return false;
  for (int j = 0; j < model.n; ++j)
    if (!(x[j] > model.domain[j].lo + margin &&
          x[j] < model.domain[j].hi - margin))
      return false;
  return !model.joint_constraint || model.joint_constraint(x).empty();
}

struct Likelihood {
  const StateModel* model = nullptr;
  const Povm* povm = nullptr;
  const std::vector<long>* counts = nullptr;
  long shots = 0;

  // Mean negative log-likelihood and its gradient; returns false when the
  // point is infeasible or some observed outcome has vanishing probability.
  bool eval(const RVec& x, double* f, RVec* grad) const {
    if (!domain_contains(*model, x, 0.0)) return false;
    const DensityMatrix rho = evaluate(*model, x);
    const int p = povm->locality;
    const DensityMatrix rho_p = tensor_power_state(rho, p);
    std::vector<CMat> tan_p;
    if (grad) tan_p = tensor_tangent(rho, tangent(*model, x), p);
    const int n = model->n;
    double acc = 0.0;
    RVec g = RVec::Zero(n);
    for (int a = 0; a < povm->outcomes(); ++a) {
      const long c = (*counts)[a];
      if (c == 0) continue;
      const double prob = (rho_p.op * povm->elements[a]).trace().real();
      if (prob < kProbabilityFloor) return false;
      acc -= c * std::log(prob);
      if (grad)
        for (int j = 0; j < n; ++j)
          g[j] -= c * (tan_p[j] * povm->elements[a]).trace().real() / prob;
    }
    *f = acc / shots;
    if (grad) *grad = g / static_cast<double>(shots);
    return true;
  }
};

}  // namespace

OutcomeSample sample(const DensityMatrix& rho, const Povm& povm, long shots,
                     std::uint64_t seed) {
  if (povm.dim != rho.dim)
    throw InvalidInputError("sample: POVM dimension mismatch");
  if (shots < 1) throw InvalidInputError("sample: shots must be >= 1");
  const int k = povm.outcomes();
  std::vector<double> probs(k);
  double total = 0.0;
  for (int a = 0; a < k; ++a) {
    double p = (rho.op * povm.elements[a]).trace().real();
    if (p < -1e-10)
      throw InvalidPovmError("sample: negative outcome probability " +
                             std::to_string(p));
    p = std::max(0.0, p);
    probs[a] = p;
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-8)
    throw InvalidPovmError("sample: probabilities sum to " +
                           std::to_string(total));
  std::vector<double> cdf(k);
  double acc = 0.0;
  for (int a = 0; a < k; ++a) {
    acc += probs[a] / total;
    cdf[a] = acc;
  }
  cdf[k - 1] = 1.0;

  OutcomeSample out;
  out.counts.assign(k, 0);
  out.shots = shots;
  out.seed = seed;
  Rng rng(seed);
  for (long s = 0; s < shots; ++s) {
    const double u = rng.uniform();
    const int idx = static_cast<int>(
        std::lower_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
    ++out.counts[std::min(idx, k - 1)];
  }
  return out;
}

MleResult mle(const StateModel& model, const Povm& povm,
              const OutcomeSample& outcome, const RVec& x0) {
  if (static_cast<int>(outcome.counts.size()) != povm.outcomes())
    throw InvalidInputError("mle: sample does not match the POVM");
  check_domain(model, x0);
  Likelihood ll{&model, &povm, &outcome.counts, outcome.shots};

  const int n = model.n;
  RVec x = x0;
  double f = 0.0;
  RVec g(n);
  if (!ll.eval(x, &f, &g))
    throw InitializationError("mle: likelihood is not finite at x0");

  RMat hinv = RMat::Identity(n, n);
  MleResult res;
  const int max_iters = 200;
  int it = 0;
  for (; it < max_iters; ++it) {
    if (g.lpNorm<Eigen::Infinity>() <= 1e-11) break;
    RVec dir = -(hinv * g);
    double slope = g.dot(dir);
    if (slope > 0.0) {
      hinv = RMat::Identity(n, n);
      dir = -g;
      slope = g.dot(dir);
    }
    double alpha = 1.0;
    bool accepted = false;
    RVec x_new;
    double f_new = 0.0;
    while (alpha > 1e-18) {
      x_new = x + alpha * dir;
      if (ll.eval(x_new, &f_new, nullptr) &&
          f_new <= f + 1e-4 * alpha * slope) {
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) break;
    RVec g_new(n);
    double f_tmp = 0.0;
    ll.eval(x_new, &f_tmp, &g_new);
    const RVec s = x_new - x;
    const RVec y = g_new - g;
    const double sy = s.dot(y);
    if (sy > 1e-14 * s.norm() * y.norm()) {
      const RVec hy = hinv * y;
      hinv += ((sy + y.dot(hy)) / (sy * sy)) * (s * s.transpose()) -
              (hy * s.transpose() + s * hy.transpose()) / sy;
    }
    x = x_new;
    f = f_new;
    g = g_new;
  }
  res.x = x;
  res.iterations = it;
  res.grad_norm = g.norm() * static_cast<double>(outcome.shots);
  res.converged = g.lpNorm<Eigen::Infinity>() <= 1e-9;
  return res;
}

TrialEnsemble covariance_experiment(const StateModel& model, const RVec& x,
                                    const Povm& povm, long shots, int trials,
                                    std::uint64_t seed) {
  if (trials < 50)
    throw InvalidInputError("covariance_experiment: needs trials >= 50");
  check_domain(model, x);
  const DensityMatrix rho = evaluate(model, x);
  const int p = povm.locality;
  const DensityMatrix rho_p = tensor_power_state(rho, p);
  const auto tan_p = tensor_tangent(rho, tangent(model, x), p);
  const FisherMatrix fc = cfim(rho_p, tan_p, povm);

  const int n = model.n;
  TrialEnsemble out;
  out.trials = trials;
  out.shots = shots;
  out.locality = p;
  out.estimates = RMat(trials, n);
  out.fc_inv = spd_inverse(fc.m);

  RMat cov = RMat::Zero(n, n);
  RVec mean = RVec::Zero(n);
  double dev_sum = 0.0, dev_sq = 0.0;
  for (int t = 0; t < trials; ++t) {
    const OutcomeSample s =
        sample(rho_p, povm, shots, derive_seed(seed, static_cast<std::uint64_t>(t)));
    const MleResult est = mle(model, povm, s, x);
    out.estimates.row(t) = est.x.transpose();
    const RVec d = est.x - x;
    cov += d * d.transpose();
    mean += est.x;
    dev_sum += d.squaredNorm();
    dev_sq += d.squaredNorm() * d.squaredNorm();
  }
  out.covariance = cov / trials;
  out.mean = mean / trials;
  const double tr_cov = out.covariance.trace();
  const double tr_ref = out.fc_inv.trace();
  out.rel_trace_deviation = std::abs(shots * tr_cov - tr_ref) / tr_ref;
  out.nu_trace = static_cast<double>(shots) * p * tr_cov;
  const double mean_dev = dev_sum / trials;
  const double var_dev = std::max(0.0, dev_sq / trials - mean_dev * mean_dev);
  out.nu_trace_se = static_cast<double>(shots) * p *
                    std::sqrt(var_dev / trials);
  return out;
}

}  // namespace qig
