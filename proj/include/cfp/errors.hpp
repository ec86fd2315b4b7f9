#pragma once

#include <stdexcept>
#include <string>

namespace cfp {

// Malformed scenario, parameter file or obstacle definition.
class ScenarioError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// The robot sits on an obstacle point (distance vector below 1e-12 m) or the
// auxiliary system hit its singular point R = S = 0.
class CollisionError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Non-finite force or state encountered during integration.
class IntegrationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace cfp
