#pragma once

#include <string>

#include <nlohmann/json_fwd.hpp>

#include "perspeed/model.hpp"

namespace perspeed {

/// Parse one coefficient object ({"kind":"constant","value":...} etc.);
/// throws ConfigError carrying the dotted field path.
PeriodicCoefficient coefficient_from_json(const nlohmann::json& j,
                                          const std::string& field);

nlohmann::ordered_json coefficient_to_json(const PeriodicCoefficient& coeff);

/// Parse the model schema
/// {"L":..,"n":..,"species1":{"d":..,"g":..,"b":..},"species2":{..},
///  "competition":{"a11":..,"a12":..,"a21":..,"a22":..}}.
/// "g" defaults to the zero coefficient, "n" to 256.
CompetitionModel model_from_json(const nlohmann::json& j);

nlohmann::ordered_json model_to_json(const CompetitionModel& model);

CompetitionModel load_model_file(const std::string& path);

}  // namespace perspeed
