#pragma once

#include <stdexcept>
#include <string>

namespace agrimeta {

// Invalid user input or violated precondition. The CLI maps this to exit code 1.
class ValidationError : public std::invalid_argument {
 public:
  explicit ValidationError(const std::string& what) : std::invalid_argument(what) {}
};

// Malformed external file (CSV/JSON/binary); carries a location in the message.
class FormatError : public ValidationError {
 public:
  explicit FormatError(const std::string& what) : ValidationError(what) {}
};

// Corrupt or unsupported model/dataset file.
class FileIntegrityError : public std::runtime_error {
 public:
  explicit FileIntegrityError(const std::string& what) : std::runtime_error(what) {}
};

// Non-finite value appeared during a numerical computation.
class NumericalFault : public std::runtime_error {
 public:
  explicit NumericalFault(const std::string& what) : std::runtime_error(what) {}
};

// A year used for evaluation also appears in the pretraining data.
class LeakageError : public std::runtime_error {
 public:
  explicit LeakageError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace agrimeta
