#pragma once

#include <stdexcept>
#include <string>

namespace pollingkit {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An argument lies outside the domain on which a formula is certified.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A fixed-point iteration did not settle within its iteration budget.
class IterationLimitError : public Error {
 public:
  IterationLimitError(const std::string& what, double last_iterate, double gap)
      : Error(what), last_iterate_(last_iterate), gap_(gap) {}

  double last_iterate() const noexcept { return last_iterate_; }
  double gap() const noexcept { return gap_; }

 private:
  double last_iterate_;
  double gap_;
};

/// An infinite product hit its term limit before the per-term gap fell below epsilon.
class TruncationError : public Error {
 public:
  TruncationError(const std::string& what, double partial_product, double last_gap)
      : Error(what), partial_product_(partial_product), last_gap_(last_gap) {}

  double partial_product() const noexcept { return partial_product_; }
  double last_gap() const noexcept { return last_gap_; }

 private:
  double partial_product_;
  double last_gap_;
};

/// Numerical differentiation could not reach the requested accuracy.
class AccuracyError : public Error {
 public:
  AccuracyError(const std::string& what, double best_estimate, double achieved_error)
      : Error(what), best_estimate_(best_estimate), achieved_error_(achieved_error) {}

  double best_estimate() const noexcept { return best_estimate_; }
  double achieved_error() const noexcept { return achieved_error_; }

 private:
  double best_estimate_;
  double achieved_error_;
};

/// A discipline-specific formula was called on a model with a different discipline.
class DisciplineMismatch : public Error {
 public:
  using Error::Error;
};

/// The model violates the stability condition or another structural invariant.
class ModelError : public Error {
 public:
  using Error::Error;
};

/// Two independent evaluations of the same quantity disagree.
class InternalDisagreement : public Error {
 public:
  InternalDisagreement(const std::string& quantity, double first, double second)
      : Error("internal disagreement on " + quantity + ": " + std::to_string(first) + " vs " +
              std::to_string(second)),
        quantity_(quantity),
        first_(first),
        second_(second) {}

  const std::string& quantity() const noexcept { return quantity_; }
  double first() const noexcept { return first_; }
  double second() const noexcept { return second_; }

 private:
  std::string quantity_;
  double first_;
  double second_;
};

}  // namespace pollingkit
