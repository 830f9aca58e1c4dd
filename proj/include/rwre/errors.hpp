#pragma once

#include <stdexcept>
#include <string>

namespace rwre {

struct InvalidDimension : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct DegenerateSupport : std::domain_error {
  using std::domain_error::domain_error;
};

struct HypothesisViolated : std::domain_error {
  using std::domain_error::domain_error;
};

struct EpsilonOutOfRange : std::domain_error {
  using std::domain_error::domain_error;
};

struct ScanCapExceeded : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct OutOfWindow : std::out_of_range {
  using std::out_of_range::out_of_range;
};

struct NotSConnected : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct FeasibilityExceeded : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct PreconditionViolated : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace rwre
