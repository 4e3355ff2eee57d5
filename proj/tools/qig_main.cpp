// Command-line front end: model inspection, Fisher matrices, analytic and
// convex bounds, POVM searches, simulated estimation experiments and the
// built-in verification suite. Reports are deterministic for a fixed
// config + seed.

#include <CLI11.hpp>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "qig/bounds_analytic.hpp"
#include "qig/bounds_convex.hpp"
#include "qig/errors.hpp"
#include "qig/estimator.hpp"
#include "qig/fisher.hpp"
#include "qig/json_io.hpp"
#include "qig/measurement.hpp"
#include "qig/models.hpp"
#include "qig/numlin.hpp"
#include "qig/povm.hpp"

namespace {

using qig::Json;
using qig::RMat;
using qig::RVec;

constexpr int kExitConfig = 2;
constexpr int kExitCompute = 3;

struct CommonArgs {
  std::string model_arg;
  std::string x_arg;
  std::string out_path;
  std::string format = "json";
  std::uint64_t seed = 1;
};

RVec parse_x(const std::string& arg) {
  std::vector<double> values;
  std::size_t pos = 0;
  while (pos < arg.size()) {
    std::size_t next = arg.find(',', pos);
    if (next == std::string::npos) next = arg.size();
    values.push_back(std::stod(arg.substr(pos, next - pos)));
    pos = next + 1;
  }
  RVec x(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) x[i] = values[i];
  return x;
}

std::vector<int> parse_int_list(const std::string& arg) {
  std::vector<int> values;
  std::size_t pos = 0;
  while (pos < arg.size()) {
    std::size_t next = arg.find(',', pos);
    if (next == std::string::npos) next = arg.size();
    values.push_back(std::stoi(arg.substr(pos, next - pos)));
    pos = next + 1;
  }
  return values;
}

Json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in)
    throw qig::InvalidInputError("cannot open file '" + path + "'");
  Json j;
  in >> j;
  return j;
}

bool file_exists(const std::string& path) {
  std::ifstream in(path);
  return in.good();
}

qig::StateModel resolve_model(const std::string& arg) {
  if (file_exists(arg)) return qig::model_from_spec(load_json_file(arg));
  for (const auto& m : qig::registry())
    if (m.name == arg) return m;
  // Extra kinds available by bare name.
  if (arg == "classical_coin") return qig::make_classical_coin();
  if (arg == "conjugate_pair") return qig::make_conjugate_pair();
  return qig::lookup_model(arg);  // throws NotFoundError naming the registry
}

RMat resolve_weight(const std::string& arg, const qig::StateModel& model,
                    const RVec& x) {
  if (arg.empty() || arg == "identity")
    return RMat::Identity(model.n, model.n);
  if (arg == "f_q") {
    const qig::DensityMatrix rho = qig::evaluate(model, x);
    return qig::qfim(rho, qig::slds(rho, qig::tangent(model, x))).m;
  }
  return qig::matrix_from_json(load_json_file(arg));
}

void emit(const Json& report, const CommonArgs& common) {
  std::string text;
  if (common.format == "csv")
    text = qig::json_to_csv(report);
  else
    text = report.dump(2) + "\n";
  if (common.out_path.empty()) {
    std::cout << text;
  } else {
    std::ofstream out(common.out_path, std::ios::binary);
    if (!out)
      throw qig::InvalidInputError("cannot write to '" + common.out_path + "'");
    out << text;
  }
}

Json base_config(const std::string& command, const CommonArgs& common) {
  Json config;
  config["command"] = command;
  config["model"] = common.model_arg;
  config["x"] = common.x_arg;
  config["seed"] = common.seed;
  return config;
}

void attach_provenance(Json& report, const Json& config, std::uint64_t seed) {
  report["seed"] = seed;
  report["config_digest"] = qig::config_digest(config);
}

int run_verify(const CommonArgs& common);

}  // namespace

int main(int argc, char** argv) {
  if (const char* env = std::getenv("QIG_MAX_DIM")) {
    try {
      qig::set_dimension_limit(std::stoul(env));
    } catch (const std::exception&) {
      std::cerr << "error: QIG_MAX_DIM is not a valid dimension\n";
      return kExitConfig;
    }
  }

  CLI::App app{"Fisher information geometry under p-local measurements"};
  app.require_subcommand(1);

  CommonArgs common;
  std::string p_arg = "1";
  std::string weight_arg = "identity";
  std::string povm_path;
  std::string povm_out;
  std::string solver_config_path;
  std::string objective = "gamma";
  int outcomes = 0;
  int restarts = 4;
  int iters = 200;
  int frames = 0;
  long shots = 10000;
  int trials = 200;
  long tp_samples = 100000;

  const auto add_common = [&](CLI::App* cmd, bool needs_x) {
    cmd->add_option("--model", common.model_arg,
                    "registry name or model-spec JSON file")
        ->required();
    auto* x_opt = cmd->add_option("--x", common.x_arg,
                                  "comma-separated parameter values");
    if (needs_x) x_opt->required();
    cmd->add_option("--seed", common.seed, "master seed");
    cmd->add_option("--out", common.out_path, "output path (default stdout)");
    cmd->add_option("--format", common.format, "json or csv")
        ->check(CLI::IsMember({"json", "csv"}));
  };

  auto* model_cmd = app.add_subcommand("model", "model registry utilities");
  auto* model_list = model_cmd->add_subcommand("list", "list built-in models");
  model_list->add_option("--out", common.out_path, "output path");
  model_list->add_option("--format", common.format, "json or csv")
      ->check(CLI::IsMember({"json", "csv"}));

  auto* qfim_cmd = app.add_subcommand("qfim", "quantum Fisher information");
  add_common(qfim_cmd, true);

  auto* cfim_cmd =
      app.add_subcommand("cfim", "classical Fisher information of a POVM");
  add_common(cfim_cmd, true);
  cfim_cmd->add_option("--povm", povm_path, "POVM JSON file")->required();

  auto* bounds_cmd =
      app.add_subcommand("bounds", "analytic Gamma_p bounds and conversions");
  add_common(bounds_cmd, true);
  bounds_cmd->add_option("--p", p_arg, "comma-separated copy counts");
  bounds_cmd->add_option("--frames", frames,
                         "extra random frames/masks for the fbar bound");
  bounds_cmd->add_option("--weight", weight_arg,
                         "identity | f_q | matrix JSON file");
  bounds_cmd->add_option("--tp-samples", tp_samples,
                         "monte-carlo samples for T_p fallback");

  auto* holevo_cmd = app.add_subcommand("holevo", "Holevo bound");
  add_common(holevo_cmd, true);
  holevo_cmd->add_option("--weight", weight_arg,
                         "identity | f_q | matrix JSON file");
  holevo_cmd->add_option("--solver-config", solver_config_path,
                         "solver config JSON file");

  auto* nagaoka_cmd = app.add_subcommand("nagaoka", "Nagaoka bound (n = 2)");
  add_common(nagaoka_cmd, true);
  nagaoka_cmd->add_option("--solver-config", solver_config_path,
                          "solver config JSON file");

  auto* optimize_cmd =
      app.add_subcommand("optimize", "search p-local POVMs");
  add_common(optimize_cmd, true);
  optimize_cmd->add_option("--p", p_arg, "copy count");
  optimize_cmd->add_option("--outcomes", outcomes, "POVM outcomes K");
  optimize_cmd->add_option("--restarts", restarts, "search restarts");
  optimize_cmd->add_option("--iters", iters, "ascent iterations per restart");
  optimize_cmd->add_option("--objective", objective, "gamma or cov")
      ->check(CLI::IsMember({"gamma", "cov"}));
  optimize_cmd->add_option("--weight", weight_arg,
                           "weight for the cov objective");
  optimize_cmd->add_option("--povm-out", povm_out,
                           "write the best POVM to this file");

  auto* simulate_cmd =
      app.add_subcommand("simulate", "sampling + MLE covariance experiment");
  add_common(simulate_cmd, true);
  simulate_cmd->add_option("--povm", povm_path,
                           "POVM JSON file (default: random)");
  simulate_cmd->add_option("--outcomes", outcomes,
                           "outcomes of the default random POVM");
  simulate_cmd->add_option("--p", p_arg, "copy count for the random POVM");
  simulate_cmd->add_option("--shots", shots, "shots per trial");
  simulate_cmd->add_option("--trials", trials, "number of trials");

  auto* verify_cmd =
      app.add_subcommand("verify", "run the built-in invariant checks");
  verify_cmd->add_option("--seed", common.seed, "master seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (model_list->parsed()) {
      Json report;
      Json models = Json::array();
      for (const auto& m : qig::registry()) {
        Json entry;
        entry["name"] = m.name;
        entry["n"] = m.n;
        entry["d"] = m.d;
        entry["derivatives"] =
            m.analytic_tangent ? "analytic" : "finite-difference";
        models.push_back(std::move(entry));
      }
      report["models"] = std::move(models);
      report["extra_kinds"] = {"classical_coin", "conjugate_pair",
                               "qubit_line"};
      emit(report, common);
      return 0;
    }

    if (verify_cmd->parsed()) return run_verify(common);

    const qig::StateModel model = resolve_model(common.model_arg);
    const RVec x = common.x_arg.empty() ? RVec() : parse_x(common.x_arg);
    Json x_json = Json::array();
    for (Eigen::Index i = 0; i < x.size(); ++i) x_json.push_back(x[i]);

    if (qfim_cmd->parsed()) {
      const qig::DensityMatrix rho = qig::evaluate(model, x);
      const qig::FisherMatrix fq =
          qig::qfim(rho, qig::slds(rho, qig::tangent(model, x)));
      Json config = base_config("qfim", common);
      Json report;
      report["model"] = model.name;
      report["x"] = x_json;
      report["qfim"] = qig::matrix_to_json(fq.m);
      attach_provenance(report, config, common.seed);
      emit(report, common);
      return 0;
    }

    if (cfim_cmd->parsed()) {
      const qig::Povm povm = qig::povm_from_json(load_json_file(povm_path));
      const qig::DensityMatrix rho = qig::evaluate(model, x);
      const qig::DensityMatrix rho_p =
          qig::tensor_power_state(rho, povm.locality);
      const auto tan_p =
          qig::tensor_tangent(rho, qig::tangent(model, x), povm.locality);
      const qig::FisherMatrix fc = qig::cfim(rho_p, tan_p, povm);
      Json config = base_config("cfim", common);
      config["povm_digest"] = qig::povm_digest(povm);
      Json report;
      report["model"] = model.name;
      report["p"] = povm.locality;
      report["povm_digest"] = qig::povm_digest(povm);
      report["cfim"] = qig::matrix_to_json(fc.m);
      attach_provenance(report, config, common.seed);
      emit(report, common);
      return 0;
    }

    if (bounds_cmd->parsed()) {
      qig::BoundOptions opts;
      opts.p_list = parse_int_list(p_arg);
      opts.frames = frames;
      opts.seed = common.seed;
      opts.tp_samples = tp_samples;
      opts.weight = resolve_weight(weight_arg, model, x);
      const auto reports = qig::bound_reports(model, x, opts);
      Json config = base_config("bounds", common);
      config["p"] = p_arg;
      config["frames"] = frames;
      config["weight"] = weight_arg;
      Json report;
      Json per_p = Json::array();
      for (const auto& r : reports) per_p.push_back(qig::bound_report_to_json(r));
      report["reports"] = std::move(per_p);
      attach_provenance(report, config, common.seed);
      emit(report, common);
      return 0;
    }

    if (holevo_cmd->parsed() || nagaoka_cmd->parsed()) {
      qig::SolveOptions opts;
      opts.seed = common.seed;
      if (!solver_config_path.empty()) {
        const Json sc = load_json_file(solver_config_path);
        opts.max_iters = sc.value("max_iters", opts.max_iters);
        opts.restarts = sc.value("restarts", opts.restarts);
        opts.seed = sc.value("seed", opts.seed);
        opts.stage_tol = sc.value("tolerance", opts.stage_tol);
        if (sc.contains("mu_schedule")) {
          const auto& mu = sc.at("mu_schedule");
          opts.mu_init = mu.at(0).get<double>();
          opts.mu_final = mu.at(1).get<double>();
          opts.mu_factor = mu.at(2).get<double>();
        }
      }
      const qig::DensityMatrix rho = qig::evaluate(model, x);
      const auto tan = qig::tangent(model, x);
      qig::SolveResult res;
      std::string name;
      if (holevo_cmd->parsed()) {
        name = "holevo";
        res = qig::holevo_bound(rho, tan, resolve_weight(weight_arg, model, x),
                                opts);
      } else {
        name = "nagaoka";
        res = qig::nagaoka_bound(rho, tan, opts);
      }
      Json config = base_config(name, common);
      config["weight"] = weight_arg;
      Json report;
      report["model"] = model.name;
      report["bound"] = name;
      report["value"] = res.value;
      report["iterations"] = res.iterations;
      report["final_mu"] = res.final_mu;
      report["grad_norm"] = res.grad_norm;
      report["stage_change"] = res.stage_change;
      report["converged"] = res.converged;
      attach_provenance(report, config, common.seed);
      emit(report, common);
      return 0;
    }

    if (optimize_cmd->parsed()) {
      const int p = parse_int_list(p_arg).at(0);
      qig::OptimizeOptions opts;
      opts.outcomes = outcomes;
      opts.restarts = restarts;
      opts.iters = iters;
      opts.seed = common.seed;
      Json config = base_config("optimize", common);
      config["p"] = p;
      config["outcomes"] = outcomes;
      config["restarts"] = restarts;
      config["iters"] = iters;
      config["objective"] = objective;
      Json report;
      report["model"] = model.name;
      report["p"] = p;
      report["objective"] = objective;
      qig::Povm best;
      if (objective == "cov") {
        const auto res = qig::optimize_cov(
            model, x, p, resolve_weight(weight_arg, model, x), opts);
        best = res.best_povm;
        report["value"] = res.value;
        report["restart_values"] = res.restart_values;
      } else {
        const auto res = qig::optimize_gamma(model, x, p, opts);
        best = res.best_povm;
        report["value"] = res.gamma;
        report["label"] = "best found";
        report["restart_values"] = res.restart_values;
        report["iterations"] = res.iterations;
      }
      report["povm_digest"] = qig::povm_digest(best);
      report["povm"] = qig::povm_to_json(best);
      attach_provenance(report, config, common.seed);
      if (!povm_out.empty()) {
        std::ofstream out(povm_out, std::ios::binary);
        if (!out)
          throw qig::InvalidInputError("cannot write to '" + povm_out + "'");
        out << qig::povm_to_json(best).dump(2) << "\n";
      }
      emit(report, common);
      return 0;
    }

    if (simulate_cmd->parsed()) {
      const int p = parse_int_list(p_arg).at(0);
      qig::Povm povm =
          povm_path.empty()
              ? qig::random_povm(
                    static_cast<int>(std::pow(model.d, p)),
                    outcomes > 0 ? outcomes
                                 : static_cast<int>(std::pow(model.d, p)) *
                                       static_cast<int>(std::pow(model.d, p)),
                    common.seed, p)
              : qig::povm_from_json(load_json_file(povm_path));
      const qig::TrialEnsemble ens =
          qig::covariance_experiment(model, x, povm, shots, trials, common.seed);
      Json config = base_config("simulate", common);
      config["shots"] = shots;
      config["trials"] = trials;
      config["povm_digest"] = qig::povm_digest(povm);
      Json report = qig::ensemble_to_json(ens);
      report["model"] = model.name;
      report["x"] = x_json;
      report["povm_digest"] = qig::povm_digest(povm);
      Json bounds;
      bounds["cfim_crb_trace"] = ens.fc_inv.trace();
      const qig::DensityMatrix rho = qig::evaluate(model, x);
      const qig::FisherMatrix fq =
          qig::qfim(rho, qig::slds(rho, qig::tangent(model, x)));
      bounds["qcrb_trace"] = qig::spd_inverse(fq.m).trace();
      report["bounds"] = std::move(bounds);
      attach_provenance(report, config, common.seed);
      emit(report, common);
      return 0;
    }

    std::cerr << "error: no subcommand selected\n";
    return kExitConfig;
  } catch (const qig::NotFoundError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const qig::DomainError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const qig::InvalidInputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const Json::exception& e) {
    std::cerr << "error: malformed JSON input: " << e.what() << "\n";
    return kExitConfig;
  } catch (const qig::Error& e) {
    std::cerr << "computation error: " << e.what() << "\n";
    return kExitCompute;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitCompute;
  }
}

namespace {

int run_verify(const CommonArgs& common) {
  using namespace qig;
  int failures = 0;
  const auto report = [&failures](const std::string& name, bool ok,
                                  const std::string& detail) {
    std::cout << (ok ? "[PASS] " : "[FAIL] ") << name;
    if (!detail.empty()) std::cout << " (" << detail << ")";
    std::cout << "\n";
    if (!ok) ++failures;
  };

  RVec x2(2);
  x2 << 0.7, 0.3;

  // QFIM additivity over copies.
  {
    double worst = 0.0;
    for (const auto& model : registry()) {
      RVec x(model.n);
      for (int j = 0; j < model.n; ++j)
        x[j] = 0.5 * (model.domain[j].lo + model.domain[j].hi) + 0.11;
      if (model.joint_constraint && !model.joint_constraint(x).empty())
        x *= 0.5;
      const DensityMatrix rho = evaluate(model, x);
      const SLDSet set = slds(rho, tangent(model, x));
      const FisherMatrix f1 = qfim(rho, set);
      const FisherMatrix f2 = qfim(tensor_power_state(rho, 2), tensor_slds(set, 2));
      worst = std::max(worst, (f2.m - 2.0 * f1.m).cwiseAbs().maxCoeff());
    }
    report("qfim additivity (p = 2)", worst < 1e-9,
           "max deviation " + format_double(worst));
  }

  // Data-processing ordering over random POVMs.
  {
    double worst = 0.0;
    for (const auto& model : registry()) {
      RVec x(model.n);
      for (int j = 0; j < model.n; ++j)
        x[j] = 0.5 * (model.domain[j].lo + model.domain[j].hi) + 0.07;
      if (model.joint_constraint && !model.joint_constraint(x).empty())
        x *= 0.5;
      const DensityMatrix rho = evaluate(model, x);
      const auto tan = tangent(model, x);
      const FisherMatrix fq = qfim(rho, slds(rho, tan));
      for (int t = 0; t < 20; ++t) {
        const Povm povm =
            random_povm(model.d, model.d * model.d,
                        derive_seed(common.seed, 100 + t));
        const FisherMatrix fc = cfim(rho, tan, povm);
        worst = std::min(worst, min_eig_sym(fq.m - fc.m));
      }
    }
    report("data processing F_C <= F_Q", worst >= -1e-8,
           "min eigenvalue " + format_double(worst));
  }

  // Dominance Cov_u >= A_u, A_u^T.
  {
    const StateModel model = lookup_model("noisy_qubit");
    const DensityMatrix rho = evaluate(model, x2);
    const auto tan = tangent(model, x2);
    double worst = 0.0;
    Rng rng(derive_seed(common.seed, 7));
    for (int t = 0; t < 20; ++t) {
      const Povm povm = random_povm(2, 4, derive_seed(common.seed, 200 + t));
      const RMat est = natural_estimator(rho, tan, povm, x2);
      CVec u(2);
      u << Complex(rng.normal(), rng.normal()),
          Complex(rng.normal(), rng.normal());
      u.normalize();
      const DominanceResult res = verify_dominance(rho, tan, povm, est, x2, u);
      worst = std::min({worst, res.min_eig_au, res.min_eig_aut});
    }
    report("dominance Cov_u >= A_u", worst >= -1e-9,
           "min eigenvalue " + format_double(worst));
  }

  // Resolution identity.
  {
    const StateModel model = lookup_model("noisy_qubit");
    const DensityMatrix rho = evaluate(model, x2);
    const auto tan = tangent(model, x2);
    const Povm povm = random_povm(2, 4, derive_seed(common.seed, 301));
    const RMat est = natural_estimator(rho, tan, povm, x2);
    const RMat cov = estimator_covariance(rho, povm, est, x2);
    Rng rng(derive_seed(common.seed, 302));
    const CMat basis = random_unitary(2, rng);
    RMat sum = RMat::Zero(2, 2);
    for (int q = 0; q < 2; ++q)
      sum += cov_u_matrix(rho, povm, est, x2, basis.col(q));
    const double dev = (sum - cov).cwiseAbs().maxCoeff();
    report("resolution identity sum_q Cov_u = Cov", dev < 1e-9,
           "max deviation " + format_double(dev));
  }

  // T_1 exact vs closed form.
  {
    const StateModel model = lookup_model("noisy_qubit");
    const DensityMatrix rho = evaluate(model, x2);
    const SLDSet set = slds(rho, tangent(model, x2));
    const SLDSet tilde = reparametrized_slds(set, qfim(rho, set));
    const TpMatrix tp = tp_matrix(rho, tilde, 1, TpMode::exact);
    double closed = 0.0;
    const CMat comm = commutator(tilde.ops[0], tilde.ops[1]);
    for (int i = 0; i < rho.dim; ++i) {
      const CVec psi = rho.eigenvectors.col(i);
      closed += 0.5 * rho.eigenvalues[i] *
                std::abs((psi.adjoint() * comm * psi)(0, 0));
    }
    const double dev = std::abs(tp.m(0, 1) - closed);
    report("T_1 closed form", dev <= 1e-12, "deviation " + format_double(dev));
  }

  std::cout << (failures == 0 ? "verification passed" : "verification FAILED")
            << "\n";
  return failures == 0 ? 0 : kExitCompute;
}

}  // namespace
