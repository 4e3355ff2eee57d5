#include "qig/bounds_analytic.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>

#include "qig/errors.hpp"

namespace qig {

namespace {

constexpr double kFrameTol = 1e-8;

CMat sqrt_from_eigensystem(const DensityMatrix& rho) {
  RVec root = rho.eigenvalues.cwiseMax(0.0).cwiseSqrt();
  return rho.eigenvectors * root.asDiagonal() * rho.eigenvectors.adjoint();
}

void check_frame(const std::vector<CVec>& u_set, Eigen::Index dim) {
  if (u_set.empty()) throw InvalidFrameError("frame is empty");
  CMat sum = CMat::Zero(dim, dim);
  for (const auto& u : u_set) {
    if (u.size() != dim)
      throw InvalidFrameError("frame vector dimension mismatch");
    sum += u * u.adjoint();
  }
  const double dev = max_abs(sum - CMat::Identity(dim, dim));
  if (dev > kFrameTol)
    throw InvalidFrameError("frame does not resolve the identity (deviation " +
                            std::to_string(dev) + ")");
}

double clamp_gamma(double value, int n) {
  return std::clamp(value, 0.0, static_cast<double>(n));
}

// Number of count vectors (c_1..c_m) with sum p: C(p+m-1, m-1).
double composition_count(int p, int m) {
  return std::round(std::exp(std::lgamma(p + m) - std::lgamma(p + 1.0) -
                             std::lgamma(static_cast<double>(m))));
}

void for_each_composition(int p, int m,
                          const std::function<void(const std::vector<int>&)>& fn) {
  std::vector<int> c(m, 0);
  const std::function<void(int, int)> rec = [&](int slot, int remaining) {
    if (slot == m - 1) {
      c[slot] = remaining;
      fn(c);
      return;
    }
    for (int k = 0; k <= remaining; ++k) {
      c[slot] = k;
      rec(slot + 1, remaining - k);
    }
  };
  rec(0, p);
}

}  // namespace

double f_n(int n) {
  if (n < 2)
    throw InvalidInputError("f_n: needs n >= 2 parameters, got " +
                            std::to_string(n));
  const double a = 1.0 / (4.0 * (n - 1));
  const double b = static_cast<double>(n - 2) / ((n - 1.0) * (n - 1.0));
  return std::max({a, b, 0.2});
}

double pure_state_gamma_bound(const FisherMatrix& fq, const RMat& fim, int n) {
  const RMat w = spd_inverse_sqrt(fq.m);
  const RMat sandwich = w * fim * w;
  return clamp_gamma(n - f_n(n) * sandwich.squaredNorm(), n);
}

CpMatrix cp_matrix(const DensityMatrix& rho, const SLDSet& slds_tilde, int p) {
  const int n = slds_tilde.n();
  const DensityMatrix rho_p = tensor_power_state(rho, p);
  const CMat sq = sqrt_from_eigensystem(rho_p);
  const SLDSet big = tensor_slds(slds_tilde, p);
  RMat out = RMat::Zero(n, n);
  for (int j = 0; j < n; ++j)
    for (int k = j + 1; k < n; ++k) {
      const double v =
          0.5 * trace_norm(sq * commutator(big.ops[j], big.ops[k]) * sq);
      out(j, k) = v;
      out(k, j) = v;
    }
  return CpMatrix{out, p};
}

double cp_gamma_bound(const CpMatrix& cp, int p, int n) {
  if (n < 2) throw InvalidInputError("cp_gamma_bound: needs n >= 2");
  const double norm2 = (cp.m / static_cast<double>(p)).squaredNorm();
  return clamp_gamma(n - norm2 / (4.0 * (n - 1)), n);
}

double fbar_imp_gamma_bound(const DensityMatrix& rho, const SLDSet& slds,
                            int p, const std::vector<CVec>& u_set,
                            const std::vector<int>& transpose_mask) {
  const int n = slds.n();
  if (transpose_mask.size() != u_set.size())
    throw InvalidFrameError("transpose mask length does not match frame size");
  const FisherMatrix fq = qfim(rho, slds);
  const DensityMatrix rho_p = tensor_power_state(rho, p);
  check_frame(u_set, rho_p.dim);
  const CMat sq = sqrt_from_eigensystem(rho_p);
  const SLDSet big = tensor_slds(slds, p);

  CMat fbar = CMat::Zero(n, n);
  CMat ys(rho_p.dim, n);
  for (std::size_t q = 0; q < u_set.size(); ++q) {
    const CVec w = sq * u_set[q];
    for (int j = 0; j < n; ++j) ys.col(j) = big.ops[j] * w;
    const CMat gram = ys.adjoint() * ys;  // (F_u)_jk = y_j^dag y_k
    if (transpose_mask[q])
      fbar += gram.transpose();
    else
      fbar += gram;
  }
  const RMat fbar_im = fbar.imag();
  const RMat winv = spd_inverse_sqrt(fq.m);
  const RMat sandwich = (winv * fbar_im * winv) / static_cast<double>(p);
  return clamp_gamma(n - f_n(n) * sandwich.squaredNorm(), n);
}

RMat cp_limit_matrix(const DensityMatrix& rho, const SLDSet& slds_tilde) {
  const int n = slds_tilde.n();
  RMat out = RMat::Zero(n, n);
  for (int j = 0; j < n; ++j)
    for (int k = j + 1; k < n; ++k) {
      const double v =
          0.5 * std::abs((rho.op *
                          commutator(slds_tilde.ops[j], slds_tilde.ops[k]))
                             .trace());
      out(j, k) = v;
      out(k, j) = v;
    }
  return out;
}

TpMatrix tp_matrix(const DensityMatrix& rho, const SLDSet& slds_tilde, int p,
                   TpMode mode, long samples, std::uint64_t seed) {
  const int n = slds_tilde.n();
  // Support-restricted eigenvalues and the purely imaginary diagonal
  // commutator expectations a_i = <Psi_i|[L~_j, L~_k]|Psi_i>.
  std::vector<int> support;
  for (int i = 0; i < rho.dim; ++i)
    if (rho.is_support(i)) support.push_back(i);
  const int m = static_cast<int>(support.size());
  std::vector<double> lambda(m);
  for (int i = 0; i < m; ++i) lambda[i] = rho.eigenvalues[support[i]];

  // im_a[j][k][i] = Im <Psi_i|[L~_j,L~_k]|Psi_i> = 2 Im <Psi_i|L~_j L~_k|Psi_i>.
  std::vector<std::vector<std::vector<double>>> im_a(
      n, std::vector<std::vector<double>>(n, std::vector<double>(m, 0.0)));
  for (int i = 0; i < m; ++i) {
    const CVec psi = rho.eigenvectors.col(support[i]);
    std::vector<CVec> lpsi(n);
    for (int j = 0; j < n; ++j) lpsi[j] = slds_tilde.ops[j] * psi;
    for (int j = 0; j < n; ++j)
      for (int k = j + 1; k < n; ++k) {
        const double v = 2.0 * (lpsi[j].dot(lpsi[k])).imag();
        im_a[j][k][i] = v;
        im_a[k][j][i] = -v;
      }
  }

  TpMatrix out;
  out.p = p;
  out.mode = mode;
  out.m = RMat::Zero(n, n);
  out.std_error = RMat::Zero(n, n);

  if (mode == TpMode::exact) {
    const double count = composition_count(p, m);
    if (count > 1e6)
      throw ResourceLimitError(
          "tp_matrix: exact enumeration needs " + std::to_string(count) +
          " count vectors; use monte-carlo mode instead");
    const double log_pfac = std::lgamma(p + 1.0);
    for_each_composition(p, m, [&](const std::vector<int>& c) {
      double logw = log_pfac;
      for (int i = 0; i < m; ++i) {
        logw -= std::lgamma(c[i] + 1.0);
        if (c[i] > 0) logw += c[i] * std::log(lambda[i]);
      }
      const double weight = std::exp(logw);
      for (int j = 0; j < n; ++j)
        for (int k = j + 1; k < n; ++k) {
          double s = 0.0;
          for (int i = 0; i < m; ++i) s += c[i] * im_a[j][k][i];
          out.m(j, k) += weight * 0.5 * std::abs(s);
        }
    });
    out.m = (out.m + out.m.transpose()).eval();
    out.samples = static_cast<long>(count);
    return out;
  }

  if (samples < 1)
    throw InvalidInputError("tp_matrix: monte-carlo mode needs samples >= 1");
  Rng rng(seed);
  std::vector<double> cdf(m);
  double acc = 0.0;
  double total = 0.0;
  for (int i = 0; i < m; ++i) total += lambda[i];
  for (int i = 0; i < m; ++i) {
    acc += lambda[i] / total;
    cdf[i] = acc;
  }
  RMat sum = RMat::Zero(n, n), sum_sq = RMat::Zero(n, n);
  std::vector<int> counts(m);
  for (long s = 0; s < samples; ++s) {
    std::fill(counts.begin(), counts.end(), 0);
    for (int r = 0; r < p; ++r) {
      const double u = rng.uniform();
      int idx = static_cast<int>(
          std::lower_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
      if (idx >= m) idx = m - 1;
      ++counts[idx];
    }
    for (int j = 0; j < n; ++j)
      for (int k = j + 1; k < n; ++k) {
        double acc_jk = 0.0;
        for (int i = 0; i < m; ++i) acc_jk += counts[i] * im_a[j][k][i];
        const double v = 0.5 * std::abs(acc_jk);
        sum(j, k) += v;
        sum_sq(j, k) += v * v;
      }
  }
  for (int j = 0; j < n; ++j)
    for (int k = j + 1; k < n; ++k) {
      const double mean = sum(j, k) / samples;
      const double var =
          std::max(0.0, sum_sq(j, k) / samples - mean * mean);
      out.m(j, k) = mean;
      out.m(k, j) = mean;
      const double se = std::sqrt(var / samples);
      out.std_error(j, k) = se;
      out.std_error(k, j) = se;
    }
  out.samples = samples;
  return out;
}

double tp_gamma_bound(const TpMatrix& tp, int p, int n) {
  if (n < 2) throw InvalidInputError("tp_gamma_bound: needs n >= 2");
  const double norm2 = (tp.m / static_cast<double>(p)).squaredNorm();
  return clamp_gamma(n - norm2 / (4.0 * (n - 1)), n);
}

double gill_massar_bound(int d) {
  if (d < 2) throw InvalidInputError("gill_massar_bound: needs d >= 2");
  return d - 1.0;
}

double zhu_hayashi_bound(int d) {
  if (d < 2) throw InvalidInputError("zhu_hayashi_bound: needs d >= 2");
  return 1.5 * (d - 1.0);
}

double weighted_cov_lower_bound(const RMat& w, const FisherMatrix& fq,
                                double d_bound) {
  if (d_bound <= 0.0)
    throw InvalidInputError("weighted_cov_lower_bound: D must be positive");
  if (w.rows() != w.cols() || w.rows() != fq.m.rows())
    throw InvalidInputError("weighted_cov_lower_bound: shape mismatch");
  if (min_eig_sym(w) < -1e-9)
    throw InvalidInputError("weighted_cov_lower_bound: W is not PSD");
  RMat sandwich;
  try {
    const RMat winv = spd_inverse_sqrt(fq.m);
    sandwich = winv * w * winv;
  } catch (const SingularMetricError& e) {
    throw InvalidInputError(std::string("weighted_cov_lower_bound: ") +
                            e.what());
  }
  Eigen::SelfAdjointEigenSolver<RMat> es(0.5 * (sandwich + sandwich.transpose()));
  double tr_root = 0.0;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
    tr_root += std::sqrt(std::max(0.0, es.eigenvalues()[i]));
  return tr_root * tr_root / d_bound;
}

std::pair<std::string, double> best_gamma_bound(const BoundReport& report) {
  static const std::map<std::string, int> precedence = {
      {"cp", 0},          {"tp", 1},          {"fbar", 2},   {"pure", 3},
      {"gill_massar", 4}, {"zhu_hayashi", 5}, {"trivial", 6}};
  if (report.entries.empty())
    throw InvalidInputError("best_gamma_bound: empty report");
  bool found = false;
  std::string best_name;
  double best_value = 0.0;
  int best_rank = 0;
  for (const auto& e : report.entries) {
    if (!e.gamma_bound) continue;
    if (e.status != "ok" && e.status != "non-binding") continue;
    const auto it = precedence.find(e.name);
    const int rank = it == precedence.end() ? 99 : it->second;
    if (!found || e.value < best_value ||
        (e.value == best_value && rank < best_rank)) {
      found = true;
      best_name = e.name;
      best_value = e.value;
      best_rank = rank;
    }
  }
  if (!found)
    throw InvalidInputError("best_gamma_bound: no applicable gamma bounds");
  return {best_name, best_value};
}

std::vector<CVec> eigenvector_frame(const DensityMatrix& rho) {
  std::vector<CVec> out;
  out.reserve(rho.dim);
  for (int i = 0; i < rho.dim; ++i) out.push_back(rho.eigenvectors.col(i));
  return out;
}

std::vector<CVec> random_frame(int dim, int count, Rng& rng) {
  if (count < dim)
    throw InvalidFrameError("random_frame: need at least dim vectors");
  const CMat v = orthonormalize(random_gaussian(count, dim, rng));
  std::vector<CVec> out;
  out.reserve(count);
  for (int q = 0; q < count; ++q) out.push_back(v.row(q).adjoint());
  return out;
}

std::vector<BoundReport> bound_reports(const StateModel& model, const RVec& x,
                                       const BoundOptions& opts) {
  const DensityMatrix rho = evaluate(model, x);
  const auto tan = tangent(model, x);
  const SLDSet set = slds(rho, tan);
  const FisherMatrix fq = qfim(rho, set);
  const int n = model.n;
  const RMat fim = f_im(rho, set);
  const bool pure = rho.support_rank == 1;

  SLDSet tilde;
  std::string tilde_problem;
  try {
    tilde = reparametrized_slds(set, fq);
  } catch (const SingularMetricError& e) {
    tilde_problem = e.what();
  }

  const RMat weight = opts.weight.size()
                          ? opts.weight
                          : RMat(RMat::Identity(n, n));

  std::vector<BoundReport> reports;
  for (const int p : opts.p_list) {
    BoundReport rep;
    rep.model = model.name;
    rep.x = x;
    rep.p = p;
    rep.n = n;
    rep.d = model.d;

    rep.entries.push_back({"trivial", static_cast<double>(n), "ok", "", true});

    if (pure) {
      rep.entries.push_back({"pure", pure_state_gamma_bound(fq, fim, n), "ok",
                             "same value for every p", true});
    } else {
      rep.entries.push_back(
          {"pure", 0.0, "skipped: mixed state", "", true});
    }

    // fbar: eigenvector frame with the identity mask first. Masks are
    // enumerated exhaustively while 2^q stays small, otherwise sampled;
    // optional extra random frames on top. Best value found is reported.
    {
      double best = std::numeric_limits<double>::infinity();
      try {
        const DensityMatrix rho_p = tensor_power_state(rho, p);
        const auto frame = eigenvector_frame(rho_p);
        const std::size_t q = frame.size();
        best = fbar_imp_gamma_bound(rho, set, p,
                                    frame, std::vector<int>(q, 0));
        int tried = 1;
        Rng rng(derive_seed(opts.seed, 1000 + p));
        if (q <= 8) {  // exhaustive over the 2^q transpose masks
          for (std::size_t bits = 1; bits < (std::size_t{1} << q); ++bits) {
            std::vector<int> mask(q);
            for (std::size_t i = 0; i < q; ++i)
              mask[i] = static_cast<int>((bits >> i) & 1u);
            best = std::min(best,
                            fbar_imp_gamma_bound(rho, set, p, frame, mask));
            ++tried;
          }
        } else {
          for (int f = 0; f < 16; ++f) {
            std::vector<int> mask(q);
            for (auto& b : mask) b = static_cast<int>(rng.below(2));
            best = std::min(best,
                            fbar_imp_gamma_bound(rho, set, p, frame, mask));
            ++tried;
          }
        }
        for (int f = 0; f < opts.frames; ++f) {
          const auto rnd = random_frame(rho_p.dim, rho_p.dim, rng);
          std::vector<int> mask(rnd.size());
          for (auto& b : mask) b = static_cast<int>(rng.below(2));
          best = std::min(
              best, fbar_imp_gamma_bound(rho, set, p, rnd, mask));
          ++tried;
        }
        rep.entries.push_back({"fbar", best, "ok",
                               "frame/mask pairs tried: " +
                                   std::to_string(tried),
                               true});
      } catch (const ResourceLimitError& e) {
        rep.entries.push_back({"fbar", 0.0,
                               std::string("skipped: ") + e.what(), "", true});
      }
    }

    if (tilde_problem.empty()) {
      try {
        const CpMatrix cp = cp_matrix(rho, tilde, p);
        rep.entries.push_back({"cp", cp_gamma_bound(cp, p, n), "ok", "", true});
      } catch (const ResourceLimitError& e) {
        rep.entries.push_back(
            {"cp", 0.0, std::string("skipped: ") + e.what(), "", true});
      }
      TpMatrix tp;
      try {
        tp = tp_matrix(rho, tilde, p, TpMode::exact);
        rep.entries.push_back({"tp", tp_gamma_bound(tp, p, n), "ok",
                               "mode: exact", true});
      } catch (const ResourceLimitError&) {
        tp = tp_matrix(rho, tilde, p, TpMode::monte_carlo, opts.tp_samples,
                       derive_seed(opts.seed, 2000 + p));
        rep.entries.push_back(
            {"tp", tp_gamma_bound(tp, p, n), "ok",
             "mode: monte-carlo, samples: " + std::to_string(tp.samples) +
                 ", max std error: " +
                 std::to_string(tp.std_error.maxCoeff()),
             true});
      }
    } else {
      rep.entries.push_back(
          {"cp", 0.0, "skipped: " + tilde_problem, "", true});
      rep.entries.push_back(
          {"tp", 0.0, "skipped: " + tilde_problem, "", true});
    }

    if (p == 1) {
      const double gm = gill_massar_bound(model.d);
      rep.entries.push_back({"gill_massar", gm,
                             n >= model.d ? "ok" : "non-binding",
                             "nontrivial only when n >= d", true});
    } else {
      rep.entries.push_back({"gill_massar", 0.0,
                             "skipped: 1-local bound", "", true});
    }

    if (p == 2) {
      const double zh = zhu_hayashi_bound(model.d);
      rep.entries.push_back({"zhu_hayashi", zh,
                             n >= zh ? "ok" : "non-binding",
                             "nontrivial only when n >= 3(d-1)/2", true});
    } else {
      rep.entries.push_back({"zhu_hayashi", 0.0,
                             "skipped: 2-local bound", "", true});
    }

    // Covariance-side entries: the QCRB reference Tr[W F_Q^{-1}] and the
    // conversion of the best Gamma bound into a weighted-covariance lower
    // bound (per nu = mu p copies).
    try {
      const RMat fq_inv = spd_inverse(fq.m);
      rep.entries.push_back({"qcrb_trace", (weight * fq_inv).trace(), "ok",
                             "Tr[W F_Q^{-1}]", false});
      const auto [bname, bvalue] = best_gamma_bound(rep);
      rep.entries.push_back(
          {"cov_lower", weighted_cov_lower_bound(weight, fq, bvalue), "ok",
           "from " + bname + " bound, nu = mu p", false});
    } catch (const Error& e) {
      rep.entries.push_back(
          {"cov_lower", 0.0, std::string("skipped: ") + e.what(), "", false});
    }

    reports.push_back(std::move(rep));
  }
  return reports;
}

}  // namespace qig
