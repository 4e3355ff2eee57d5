#include "qig/json_io.hpp"

#include <charconv>
#include <cstdint>

#include "qig/errors.hpp"

namespace qig {

namespace {

void reject_unknown_fields(const Json& j, std::initializer_list<const char*> allowed,
                           const std::string& where) {
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (const char* a : allowed)
      if (key == a) ok = true;
    if (!ok)
      throw InvalidInputError(where + ": unknown field '" + key + "'");
  }
}

CMat complex_matrix_from_json(const Json& re, const Json& im) {
  const RMat real = matrix_from_json(re);
  const RMat imag = matrix_from_json(im);
  if (real.rows() != imag.rows() || real.cols() != imag.cols())
    throw InvalidInputError("povm element re/im shape mismatch");
  CMat out(real.rows(), real.cols());
  out.real() = real;
  out.imag() = imag;
  return out;
}

}  // namespace

Json matrix_to_json(const RMat& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

RMat matrix_from_json(const Json& j) {
  if (!j.is_array() || j.empty() || !j[0].is_array())
    throw InvalidInputError("expected a 2-D array of numbers");
  const Eigen::Index rows = static_cast<Eigen::Index>(j.size());
  const Eigen::Index cols = static_cast<Eigen::Index>(j[0].size());
  RMat out(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    if (static_cast<Eigen::Index>(j[i].size()) != cols)
      throw InvalidInputError("ragged matrix rows");
    for (Eigen::Index k = 0; k < cols; ++k) out(i, k) = j[i][k].get<double>();
  }
  return out;
}

Json povm_to_json(const Povm& povm) {
  Json j;
  j["dim"] = povm.dim;
  j["p"] = povm.locality;
  j["K"] = povm.outcomes();
  Json elements = Json::array();
  for (const auto& m : povm.elements) {
    Json pair = Json::array();
    pair.push_back(matrix_to_json(m.real()));
    pair.push_back(matrix_to_json(m.imag()));
    elements.push_back(std::move(pair));
  }
  j["elements"] = std::move(elements);
  return j;
}

Povm povm_from_json(const Json& j) {
  reject_unknown_fields(j, {"dim", "p", "K", "elements"}, "povm");
  const int dim = j.at("dim").get<int>();
  const int p = j.at("p").get<int>();
  const auto& elements_json = j.at("elements");
  if (j.contains("K") &&
      j.at("K").get<int>() != static_cast<int>(elements_json.size()))
    throw InvalidInputError("povm: K does not match the element count");
  std::vector<CMat> elements;
  for (const auto& pair : elements_json) {
    if (!pair.is_array() || pair.size() != 2)
      throw InvalidInputError("povm: element must be an [re, im] pair");
    CMat m = complex_matrix_from_json(pair[0], pair[1]);
    if (m.rows() != dim || m.cols() != dim)
      throw InvalidInputError("povm: element dimension mismatch");
    elements.push_back(std::move(m));
  }
  return Povm::from_elements(std::move(elements), p);
}

StateModel model_from_spec(const Json& j) {
  reject_unknown_fields(j, {"name", "n", "d", "kind", "params"}, "model spec");
  const std::string kind = j.at("kind").get<std::string>();
  Json params = j.value("params", Json::object());

  StateModel model;
  if (kind == "pure_qubit") {
    reject_unknown_fields(params, {}, "pure_qubit params");
    model = make_pure_qubit();
  } else if (kind == "noisy_qubit") {
    reject_unknown_fields(params, {"eta"}, "noisy_qubit params");
    model = make_noisy_qubit(params.value("eta", 0.8));
  } else if (kind == "bloch_3p") {
    reject_unknown_fields(params, {}, "bloch_3p params");
    model = make_bloch_3p();
  } else if (kind == "classical_2p") {
    reject_unknown_fields(params, {}, "classical_2p params");
    model = make_classical_2p();
  } else if (kind == "unitary_2p") {
    reject_unknown_fields(params, {}, "unitary_2p params");
    model = make_unitary_2p();
  } else if (kind == "classical_coin") {
    reject_unknown_fields(params, {}, "classical_coin params");
    model = make_classical_coin();
  } else if (kind == "conjugate_pair") {
    reject_unknown_fields(params, {}, "conjugate_pair params");
    model = make_conjugate_pair();
  } else if (kind == "qubit_line") {
    reject_unknown_fields(params, {"seed"}, "qubit_line params");
    model = make_qubit_line(params.value("seed", std::uint64_t{1}));
  } else {
    throw NotFoundError("model spec: unknown kind '" + kind + "'");
  }
  if (j.contains("n") && j.at("n").get<int>() != model.n)
    throw InvalidInputError("model spec: n does not match kind");
  if (j.contains("d") && j.at("d").get<int>() != model.d)
    throw InvalidInputError("model spec: d does not match kind");
  if (j.contains("name")) model.name = j.at("name").get<std::string>();
  return model;
}

Json bound_report_to_json(const BoundReport& report) {
  Json j;
  j["model"] = report.model;
  Json x = Json::array();
  for (Eigen::Index i = 0; i < report.x.size(); ++i) x.push_back(report.x[i]);
  j["x"] = std::move(x);
  j["p"] = report.p;
  j["n"] = report.n;
  j["d"] = report.d;
  Json bounds = Json::array();
  for (const auto& e : report.entries) {
    Json entry;
    entry["name"] = e.name;
    entry["value"] = e.value;
    entry["status"] = e.status;
    if (!e.meta.empty()) entry["meta"] = e.meta;
    entry["gamma_bound"] = e.gamma_bound;
    bounds.push_back(std::move(entry));
  }
  j["bounds"] = std::move(bounds);
  const auto [name, value] = best_gamma_bound(report);
  j["best"] = Json{{"name", name}, {"value", value}};
  return j;
}

Json ensemble_to_json(const TrialEnsemble& ensemble) {
  Json j;
  j["trials"] = ensemble.trials;
  j["shots"] = ensemble.shots;
  j["p"] = ensemble.locality;
  j["nu_cov"] = matrix_to_json(
      (static_cast<double>(ensemble.shots) * ensemble.covariance).eval());
  j["fc_inv"] = matrix_to_json(ensemble.fc_inv);
  Json mean = Json::array();
  for (Eigen::Index i = 0; i < ensemble.mean.size(); ++i)
    mean.push_back(ensemble.mean[i]);
  j["mean"] = std::move(mean);
  j["rel_trace_deviation"] = ensemble.rel_trace_deviation;
  j["nu_trace"] = ensemble.nu_trace;
  j["nu_trace_se"] = ensemble.nu_trace_se;
  return j;
}

std::string config_digest(const Json& config) {
  const std::string dump = config.dump();
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : dump) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(h));
  return std::string(buf);
}

std::string format_double(double value) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

namespace {

void flatten_json(const Json& j, const std::string& prefix, std::string& out) {
  if (j.is_object()) {
    for (const auto& [key, value] : j.items())
      flatten_json(value, prefix.empty() ? key : prefix + "." + key, out);
  } else if (j.is_array()) {
    int idx = 0;
    for (const auto& value : j)
      flatten_json(value, prefix + "[" + std::to_string(idx++) + "]", out);
  } else {
    out += prefix;
    out += ',';
    if (j.is_number_float())
      out += format_double(j.get<double>());
    else
      out += j.dump();
    out += '\n';
  }
}

}  // namespace

std::string json_to_csv(const Json& j) {
  std::string out = "key,value\n";
  flatten_json(j, "", out);
  return out;
}

}  // namespace qig
