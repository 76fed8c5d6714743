#pragma once

#include <nlohmann/json.hpp>

#include "egoact/augment.hpp"
#include "egoact/net.hpp"

namespace egoact {

nlohmann::json to_json(const NetConfig& cfg);
// Missing keys keep the values already in `base`.
NetConfig net_config_from_json(const nlohmann::json& j, NetConfig base = {});

nlohmann::json to_json(const AugmentConfig& cfg);
AugmentConfig augment_config_from_json(const nlohmann::json& j, AugmentConfig base = {});

} // namespace egoact
