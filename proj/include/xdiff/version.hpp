#pragma once

#include <string>
#include <utility>
#include <vector>

namespace xdiff {

inline constexpr const char* kVersion = "0.1.0";

/// (component, version) pairs for the library and the numerical backends.
std::vector<std::pair<std::string, std::string>> build_versions();

}  // namespace xdiff
