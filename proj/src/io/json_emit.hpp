#pragma once

#include <string>

#include <json.hpp>

namespace lightpos::detail {

/// Compact-per-line JSON: sorted keys, two-space indent, floats at %.9g, LF.
std::string stable_dump(const nlohmann::json& value);

}  // namespace lightpos::detail
