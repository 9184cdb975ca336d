#pragma once

#include <stdexcept>
#include <string>

namespace pm {

/// The request is well formed but beyond what the chosen method supports
/// (e.g. exact one-color matching above its size cap).
class CapabilityError : public std::runtime_error {
 public:
  explicit CapabilityError(const std::string& what) : std::runtime_error(what) {}
};

/// A numerical routine failed to meet its contract.
class SolverError : public std::runtime_error {
 public:
  explicit SolverError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace pm
