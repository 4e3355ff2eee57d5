#pragma once

#include <string>

#include <json.hpp>

#include "qig/bounds_analytic.hpp"
#include "qig/estimator.hpp"
#include "qig/measurement.hpp"
#include "qig/models.hpp"
#include "qig/povm.hpp"

// JSON (de)serialization for the file formats the CLI speaks: model specs,
// POVMs, bound reports and experiment reports. Kept in the library so tests
// can round-trip the schemas directly.

namespace qig {

using Json = nlohmann::json;

Json matrix_to_json(const RMat& m);
RMat matrix_from_json(const Json& j);

// {"dim", "p", "K", "elements": [[re, im], ...]} with re/im row-major.
Json povm_to_json(const Povm& povm);
Povm povm_from_json(const Json& j);

// {"name", "n", "d", "kind", "params": {...}}; unknown fields rejected.
// Kinds: the registry families plus classical_coin, conjugate_pair and
// qubit_line (seeded), with overridable constants where the family has any.
StateModel model_from_spec(const Json& j);

Json bound_report_to_json(const BoundReport& report);

Json ensemble_to_json(const TrialEnsemble& ensemble);

// FNV-1a over the canonical dump; stable identifier carried by reports.
std::string config_digest(const Json& config);

// Shortest round-trip decimal representation.
std::string format_double(double value);

// "path,value" lines, one per leaf, in deterministic order.
std::string json_to_csv(const Json& j);

}  // namespace qig
