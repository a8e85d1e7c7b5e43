#pragma once

#include <json.hpp>

#include "countar/config.hpp"

namespace countar {

using Json = nlohmann::ordered_json;

Json config_to_json(const ExperimentConfig& config);

}  // namespace countar
