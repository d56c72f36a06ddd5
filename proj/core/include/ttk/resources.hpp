#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

// Data files compiled into the library (see core/data/).
namespace ttk::resources {

std::optional<std::string_view> find(std::string_view name);
std::vector<std::string_view> names();

/// Like find() but throws std::out_of_range for unknown names.
std::string_view get(std::string_view name);

}  // namespace ttk::resources
