#pragma once

#include <string>
#include <string_view>

#include <json.hpp>

#include "hope/terms.hpp"

namespace hope {

/// JSON schema: either an array of term objects or {"terms": [...]}; each term is
///   {"term":"edges"}
///   {"term":"gwesp","decay":0.75}        {"term":"gwdegree","decay":0.8}
///   {"term":"nodecov","attr":"Seniority"}
///   {"term":"nodematch","attr":"Office"} (uniform)
///   {"term":"nodematch","attr":"Office","diff":true,"keep":[1,2]}
///   {"term":"edgecov","matrix":"distance"}
/// Throws UsageError on unknown terms or missing fields.
ModelSpec model_from_json(const nlohmann::json& j);
nlohmann::json model_to_json(const ModelSpec& spec);

/// Parses an ergm-style formula, e.g.
///   edges + gwesp(0.75) + nodematch("Office", diff=TRUE, keep=c(1,2)) + gwdegree(log(2))
ModelSpec parse_formula(std::string_view formula);
std::string to_formula(const ModelSpec& spec);

/// Accepts a path to a JSON file, inline JSON, or a formula.
ModelSpec parse_model_argument(const std::string& arg);

}  // namespace hope
