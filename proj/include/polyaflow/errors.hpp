#pragma once

#include <stdexcept>
#include <string>

namespace polyaflow {

/// Invalid argument: out-of-range parameters, mismatched windows, bad grids.
class ParameterError : public std::invalid_argument {
 public:
  explicit ParameterError(const std::string& what) : std::invalid_argument(what) {}
};

/// The arguments are well-formed but the requested object does not exist
/// (wrong flow variant, configuration outside the support).
class DomainError : public std::domain_error {
 public:
  explicit DomainError(const std::string& what) : std::domain_error(what) {}
};

/// A numerical budget was exceeded (truncation tail too heavy, zero void probability).
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace polyaflow
