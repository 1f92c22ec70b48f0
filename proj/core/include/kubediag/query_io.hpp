#pragma once

#include <nlohmann/json.hpp>

#include "kubediag/common.hpp"

namespace kubediag {

nlohmann::json to_json(const Query& q);
/// Throws SchemaViolation.
Query query_from_json(const nlohmann::json& j);

}  // namespace kubediag
