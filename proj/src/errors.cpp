#include "ropejump/errors.hpp"

namespace ropejump {

namespace {

std::string join(const std::vector<std::string>& issues) {
  std::string out = "invalid configuration";
  for (const auto& i : issues) out += "\n  - " + i;
  return out;
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> issues) : Error(join(issues)), issues_(std::move(issues)) {}

}  // namespace ropejump
