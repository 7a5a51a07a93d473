#pragma once

#include <stdexcept>
#include <string>

namespace torsion {

/// Input violates a precondition: malformed shapes, d^2 != 0, relation
/// residuals, spectral cuts that touch the spectrum, and so on.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

/// A computation could not be carried out reliably in floating point
/// (ambiguous rank, eigenvalue on a classification boundary, ...).
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace torsion
