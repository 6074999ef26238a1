/// @file assets.hpp
/// @brief Text assets compiled into the library (templates, seed pools, plan).

#pragma once

#include <optional>
#include <string_view>
#include <vector>

namespace sage::assets {

/// Looks up an asset by its path relative to the asset root,
/// e.g. "templates/persona_gen.txt".
std::optional<std::string_view> find(std::string_view name);

/// Like find() but throws ConfigError when absent.
std::string_view get(std::string_view name);

std::vector<std::string_view> names();

}  // namespace sage::assets
