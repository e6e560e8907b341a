#pragma once

#include <stdexcept>
#include <string>

namespace declutter {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Embedding or distance query on a cloud with no points.
class EmptyCloudError : public Error {
 public:
  explicit EmptyCloudError(const std::string& what) : Error("empty cloud: " + what) {}
};

// Argument outside the mathematical domain of an operation (non-finite point, h > 1, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

// Invalid configuration value or unknown configuration key.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Mismatched lengths or shapes between arguments.
class ContractError : public Error {
 public:
  using Error::Error;
};

// Malformed input file; the message carries the line number.
class FormatError : public Error {
 public:
  using Error::Error;
};

// Non-finite simulator state after a step.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

// Scenario generator could not satisfy its constraints within the retry budget.
class ScenarioError : public Error {
 public:
  using Error::Error;
};

// Loss or gradient went non-finite during an update.
class TrainingError : public Error {
 public:
  using Error::Error;
};

}  // namespace declutter
