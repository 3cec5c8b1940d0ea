#ifndef WCXOPT_ERRORS_HPP
#define WCXOPT_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace wcx {

/// Precondition violated by the caller (dimension mismatch, bad constant, ...).
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A numerical routine failed to reach its target accuracy or met a
/// non-finite value. `residual` carries the best accuracy achieved, if known.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what, double residual = -1.0)
      : std::runtime_error(what), residual_(residual) {}

  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

}  // namespace wcx

#endif  // WCXOPT_ERRORS_HPP
