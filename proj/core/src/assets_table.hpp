// Internal: table filled in by the generated assets_data.cpp.
#pragma once

#include <cstddef>
#include <string_view>

namespace sage::assets::detail {

struct Entry {
  std::string_view name;
  std::string_view text;
};

extern const Entry kEntries[];
extern const std::size_t kEntryCount;

}  // namespace sage::assets::detail
