#include <array>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <string>

#include "doctest.h"
#include "qig/json_io.hpp"
#include "qig/povm.hpp"

using namespace qig;

namespace {

struct RunResult {
  int exit_code = -1;
  std::string out;
};

std::string cli_path() {
  const char* env = std::getenv("QIG_CLI");
  REQUIRE_MESSAGE(env != nullptr, "QIG_CLI must point at the binary");
  return env;
}

RunResult run(const std::string& args) {
  const std::string cmd = cli_path() + " " + args + " 2>/dev/null";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  RunResult res;
  std::array<char, 4096> buf;
  std::size_t got = 0;
  while ((got = fread(buf.data(), 1, buf.size(), pipe)) > 0)
    res.out.append(buf.data(), got);
  const int status = pclose(pipe);
  res.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return res;
}

}  // namespace

TEST_CASE("model list succeeds and names the registry") {
  const RunResult res = run("model list");
  CHECK(res.exit_code == 0);
  const Json j = Json::parse(res.out);
  REQUIRE(j.contains("models"));
  CHECK(j["models"].size() == 5);
}

TEST_CASE("unknown model exits with the config code and names the registry") {
  const RunResult res = run("qfim --model does_not_exist --x 0.1");
  CHECK(res.exit_code == 2);
}

TEST_CASE("same config and seed give byte-identical reports") {
  const std::string args =
      "bounds --model noisy_qubit --x 0.7,0.3 --p 1,2 --frames 2 --seed 9";
  const RunResult a = run(args);
  const RunResult b = run(args);
  CHECK(a.exit_code == 0);
  CHECK(a.out == b.out);
  CHECK(!a.out.empty());
}

TEST_CASE("bounds report carries per-p entries, best and provenance") {
  const RunResult res =
      run("bounds --model noisy_qubit --x 0.7,0.3 --p 1,2,3 --seed 4");
  REQUIRE(res.exit_code == 0);
  const Json j = Json::parse(res.out);
  REQUIRE(j["reports"].size() == 3);
  for (const auto& rep : j["reports"]) {
    CHECK(rep.contains("best"));
    CHECK(rep["best"]["value"].get<double>() <= 2.0 + 1e-9);
    bool saw_trivial = false;
    for (const auto& e : rep["bounds"])
      if (e["name"] == "trivial") saw_trivial = true;
    CHECK(saw_trivial);
  }
  CHECK(j.contains("config_digest"));
  CHECK(j.contains("seed"));
}

TEST_CASE("bound report JSON round-trips through parse(emit())") {
  const RunResult res =
      run("bounds --model classical_2p --x 0.2,0.3 --p 1 --seed 2");
  REQUIRE(res.exit_code == 0);
  const Json parsed = Json::parse(res.out);
  CHECK(parsed.dump(2) + "\n" == res.out);
}

TEST_CASE("csv and json emissions agree numerically") {
  const std::string base = "qfim --model pure_qubit --x 0.7,0.3 --seed 1";
  const RunResult js = run(base);
  const RunResult csv = run(base + " --format csv");
  REQUIRE(js.exit_code == 0);
  REQUIRE(csv.exit_code == 0);
  const Json j = Json::parse(js.out);
  const double want = j["qfim"][1][1].get<double>();
  // The csv line for qfim[1][1] must reproduce the value to full precision.
  const std::string key = "qfim[1][1],";
  const auto pos = csv.out.find(key);
  REQUIRE(pos != std::string::npos);
  const auto end = csv.out.find('\n', pos);
  const double got = std::stod(csv.out.substr(pos + key.size(), end - pos));
  CHECK(got == doctest::Approx(want).epsilon(1e-12));
}

TEST_CASE("optimize emits a POVM consumable by cfim") {
  const std::string povm_file = "/tmp/qig_test_povm.json";
  const RunResult opt = run(
      "optimize --model classical_2p --x 0.2,0.3 --p 1 --restarts 2 "
      "--iters 80 --seed 3 --povm-out " + povm_file);
  REQUIRE(opt.exit_code == 0);
  const Json j = Json::parse(opt.out);
  CHECK(j["value"].get<double>() == doctest::Approx(2.0).epsilon(1e-6));
  CHECK(j["label"] == "best found");

  // Round-trip the written POVM file through the schema.
  std::ifstream in(povm_file);
  REQUIRE(in.good());
  Json povm_json;
  in >> povm_json;
  const Povm povm = povm_from_json(povm_json);
  CHECK(povm.dim == 3);
  const Json again = povm_to_json(povm);
  CHECK(again.dump() == povm_json.dump());

  const RunResult cf =
      run("cfim --model classical_2p --x 0.2,0.3 --povm " + povm_file);
  REQUIRE(cf.exit_code == 0);
  const Json cj = Json::parse(cf.out);
  CHECK(cj["cfim"].is_array());
}

TEST_CASE("holevo and nagaoka subcommands report diagnostics") {
  const RunResult hol = run("holevo --model noisy_qubit --x 0.7,0.3");
  REQUIRE(hol.exit_code == 0);
  const Json hj = Json::parse(hol.out);
  CHECK(hj["converged"].get<bool>());
  const RunResult nag = run("nagaoka --model noisy_qubit --x 0.7,0.3");
  REQUIRE(nag.exit_code == 0);
  const Json nj = Json::parse(nag.out);
  CHECK(nj["value"].get<double>() >= hj["value"].get<double>() - 1e-5);
}

TEST_CASE("solver config files tune the convex solver") {
  const std::string cfg = "/tmp/qig_test_solver.json";
  {
    std::ofstream out(cfg);
    out << R"({"max_iters": 300, "mu_schedule": [1e-2, 1e-8, 0.1],)"
        << R"( "restarts": 2, "seed": 5, "tolerance": 1e-7})";
  }
  const RunResult res =
      run("holevo --model noisy_qubit --x 0.7,0.3 --solver-config " + cfg);
  REQUIRE(res.exit_code == 0);
  const Json j = Json::parse(res.out);
  CHECK(j["converged"].get<bool>());
  CHECK(j["value"].get<double>() > 0.0);
}

TEST_CASE("nagaoka on three parameters is a computation error") {
  const RunResult res = run("nagaoka --model bloch_3p --x 0.2,0.3,0.1");
  CHECK(res.exit_code == 3);
}

TEST_CASE("simulate produces an experiment report with the declared schema") {
  const RunResult res = run(
      "simulate --model classical_coin --x 0.3 --shots 2000 --trials 60 "
      "--outcomes 2 --seed 11");
  REQUIRE(res.exit_code == 0);
  const Json j = Json::parse(res.out);
  for (const char* key :
       {"model", "x", "povm_digest", "shots", "trials", "nu_cov", "fc_inv",
        "bounds", "seed", "config_digest"})
    CHECK(j.contains(key));
  CHECK(j["rel_trace_deviation"].get<double>() < 0.5);
}

TEST_CASE("model-spec files instantiate kinds with overridden constants") {
  const std::string spec_file = "/tmp/qig_test_model.json";
  {
    std::ofstream out(spec_file);
    out << R"({"name": "dimmer", "kind": "noisy_qubit", "params": {"eta": 0.5}})";
  }
  const RunResult res = run("qfim --model " + spec_file + " --x 0.7,0.3");
  REQUIRE(res.exit_code == 0);
  const Json j = Json::parse(res.out);
  CHECK(j["model"] == "dimmer");
  // Weaker visibility shrinks the information.
  CHECK(j["qfim"][0][0].get<double>() < 0.5);

  {
    std::ofstream out(spec_file);
    out << R"({"kind": "noisy_qubit", "params": {"eta": 0.5}, "bogus": 1})";
  }
  const RunResult bad = run("qfim --model " + spec_file + " --x 0.7,0.3");
  CHECK(bad.exit_code == 2);
}

TEST_CASE("QIG_MAX_DIM caps the operator dimension but reports stay total") {
  const std::string cmd =
      "QIG_MAX_DIM=8 " + cli_path() +
      " bounds --model classical_2p --x 0.2,0.3 --p 3 --seed 1 2>/dev/null";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::string out;
  std::array<char, 4096> buf;
  std::size_t got = 0;
  while ((got = fread(buf.data(), 1, buf.size(), pipe)) > 0)
    out.append(buf.data(), got);
  const int status = pclose(pipe);
  REQUIRE(WIFEXITED(status));
  CHECK(WEXITSTATUS(status) == 0);
  const Json j = Json::parse(out);
  bool saw_skipped_cp = false;
  bool saw_trivial_ok = false;
  for (const auto& e : j["reports"][0]["bounds"]) {
    if (e["name"] == "cp" &&
        e["status"].get<std::string>().rfind("skipped", 0) == 0)
      saw_skipped_cp = true;
    if (e["name"] == "trivial" && e["status"] == "ok") saw_trivial_ok = true;
  }
  CHECK(saw_skipped_cp);  // d^3 = 27 exceeds the cap of 8
  CHECK(saw_trivial_ok);
}

TEST_CASE("verify subcommand passes its invariant suite") {
  const RunResult res = run("verify --seed 1");
  CHECK(res.exit_code == 0);
  CHECK(res.out.find("[FAIL]") == std::string::npos);
  CHECK(res.out.find("[PASS]") != std::string::npos);
}
