#pragma once

#include <stdexcept>
#include <string>

namespace fedsim {

struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& msg) : std::runtime_error("config error: " + msg) {}
};

struct InvalidNetworkError : std::runtime_error {
  explicit InvalidNetworkError(const std::string& msg)
      : std::runtime_error("invalid network: " + msg) {}
};

struct ConstraintViolationError : std::runtime_error {
  explicit ConstraintViolationError(const std::string& msg)
      : std::runtime_error("constraint violation: " + msg) {}
};

struct AggregationError : std::runtime_error {
  explicit AggregationError(const std::string& msg)
      : std::runtime_error("aggregation error: " + msg) {}
};

struct DimensionError : std::runtime_error {
  explicit DimensionError(const std::string& msg)
      : std::runtime_error("dimension mismatch: " + msg) {}
};

}  // namespace fedsim
