#pragma once

#include <stdexcept>
#include <string>

namespace spinsnr {

/// Input outside the domain of an operation (non-positive times, points off the disk, ...).
class DomainError : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

/// Relaxation pair violating 2*Gamma >= gamma (T2 > 2 T1).
class PhysicalityError : public DomainError {
public:
  using DomainError::DomainError;
};

/// A computed state would leave the closed unit disk.
class RangeError : public std::range_error {
public:
  using std::range_error::range_error;
};

class IntegrationError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class ConvergenceError : public std::runtime_error {
public:
  ConvergenceError(const std::string& what, double residual)
      : std::runtime_error(what), residual_(residual) {}
  double residual() const noexcept { return residual_; }

private:
  double residual_;
};

class NumericalError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

} // namespace spinsnr
