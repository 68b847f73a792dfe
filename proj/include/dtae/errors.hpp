#pragma once

#include <stdexcept>
#include <string>

namespace dtae {

// Shape mismatches, invalid hyper-parameters and unknown config keys.
class ConfigError : public std::invalid_argument {
 public:
  explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

// A computation produced (or was handed) a NaN or Inf.
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

// API called out of order, e.g. stepping a finished episode.
class UsageError : public std::logic_error {
 public:
  explicit UsageError(const std::string& what) : std::logic_error(what) {}
};

}  // namespace dtae
