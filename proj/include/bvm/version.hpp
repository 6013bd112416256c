#pragma once

#include <string>
#include <utility>
#include <vector>

namespace bvm {

inline constexpr const char* kVersion = "0.1.0";

// per-module version stamp embedded in every persisted artifact
inline const std::vector<std::pair<std::string, std::string>>& module_versions() {
  static const std::vector<std::pair<std::string, std::string>> v = {
      {"torus", kVersion},       {"rd_solver", kVersion}, {"schrodinger", kVersion},
      {"information", kVersion}, {"bayes", kVersion},     {"lab", kVersion},
      {"cli", kVersion}};
  return v;
}

}  // namespace bvm
