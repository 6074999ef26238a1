/// @file assets.cpp

#include "sage/assets.hpp"

#include <string>

#include "assets_table.hpp"
#include "sage/error.hpp"

namespace sage::assets {

std::optional<std::string_view> find(std::string_view name) {
  for (std::size_t i = 0; i < detail::kEntryCount; ++i) {
    if (detail::kEntries[i].name == name) return detail::kEntries[i].text;
  }
  return std::nullopt;
}

std::string_view get(std::string_view name) {
  if (auto text = find(name)) return *text;
  throw ConfigError("no builtin asset named '" + std::string(name) + "'");
}

std::vector<std::string_view> names() {
  std::vector<std::string_view> out;
  for (std::size_t i = 0; i < detail::kEntryCount; ++i) out.push_back(detail::kEntries[i].name);
  return out;
}

}  // namespace sage::assets
