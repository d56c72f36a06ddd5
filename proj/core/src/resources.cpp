#include "ttk/resources.hpp"

#include <stdexcept>

namespace ttk::resources {

std::string_view get(std::string_view name) {
  if (auto v = find(name)) return *v;
  throw std::out_of_range("no bundled resource named " + std::string(name));
}

}  // namespace ttk::resources
