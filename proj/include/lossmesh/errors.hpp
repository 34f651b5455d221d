#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace lossmesh {

// Base for every error the library raises. Engines throw; the CLI maps the
// concrete type to an exit status.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid parameters or configuration. `field` is a JSON-pointer-like path
// when the error originates from a config file, otherwise a parameter name.
class ValidationError : public Error {
 public:
  ValidationError(std::string field, const std::string& what)
      : Error(field.empty() ? what : field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

class UnsupportedOperation : public Error {
 public:
  using Error::Error;
};

class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double residual)
      : Error(what + " (last residual " + std::to_string(residual) + ")"), residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

class IntegrationError : public Error {
 public:
  IntegrationError(const std::string& what, std::size_t step)
      : Error(what + " at step " + std::to_string(step)), step_(step) {}
  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

class EstimationError : public Error {
 public:
  using Error::Error;
};

class AlignmentError : public Error {
 public:
  using Error::Error;
};

}  // namespace lossmesh
