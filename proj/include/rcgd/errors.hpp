#pragma once

#include <stdexcept>
#include <string>

namespace rcgd {

// Malformed user input: unknown corpus name, bad matrix file, bad config key.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// An iterate left the objective's working region.
struct RegionExit : std::runtime_error {
  explicit RegionExit(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace rcgd
