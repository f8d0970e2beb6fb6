#pragma once

#include <stdexcept>
#include <string>

namespace ngs {

// Bad input: dimension mismatch, non-symplectic matrix, invalid parameters.
class ValidationError : public std::invalid_argument {
  public:
    explicit ValidationError(const std::string& what) : std::invalid_argument(what) {}
};

// Singular or ill-conditioned linear algebra, truncation leakage and similar.
class NumericalError : public std::runtime_error {
  public:
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

// The vacuum reference overlap of a state is too small to divide by.
class ReferenceDegenerate : public NumericalError {
  public:
    explicit ReferenceDegenerate(const std::string& what) : NumericalError(what) {}
};

}  // namespace ngs
