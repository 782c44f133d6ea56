#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace twkit {

/// Malformed or inconsistent input data (bad CSV cell, undeclared code, ...).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A numerical fault during training, e.g. a non-finite loss or gradient.
class TrainingFault : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Non-fatal diagnostics collected by operations that degrade gracefully.
using Warnings = std::vector<std::string>;

inline void warn(Warnings* sink, std::string message) {
  if (sink != nullptr) sink->push_back(std::move(message));
}

}  // namespace twkit
