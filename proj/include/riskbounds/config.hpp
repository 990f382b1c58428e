#pragma once

#include <filesystem>
#include <string_view>

#include "riskbounds/model.hpp"

namespace riskbounds {

// JSON model file.  Interval ends may be the strings "inf" and "-inf";
// unknown keys are rejected so that typos do not pass silently.
ModelConfig parse_config(std::string_view json_text);
ModelConfig load_config(const std::filesystem::path& path);

}  // namespace riskbounds
