#pragma once

#include <stdexcept>

namespace csiae {

// Invalid configuration (profiles, lambda sets, architecture requests).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Shape or count mismatch in a call.
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Value outside the supported domain, e.g. an RB count above 256.
class RangeError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

// API called in the wrong state (stale cache, wrong approach for fine-tuning).
class UsageError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class TrainingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed or truncated file.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace csiae
