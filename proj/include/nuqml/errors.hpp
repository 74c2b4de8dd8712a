#pragma once

#include <stdexcept>
#include <string>

namespace nuqml {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Requested qubit count is outside what the simulator will allocate.
class CapacityError : public Error {
 public:
  using Error::Error;
};

/// Qubit or slot index outside the valid range.
class IndexError : public Error {
 public:
  using Error::Error;
};

/// Parameter vector does not match what a program or routine expects.
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// Post-selection onto a subspace that carries (numerically) no probability mass.
class DegeneratePostselection : public Error {
 public:
  DegeneratePostselection(const std::string& what, double success_prob)
      : Error(what), success_prob_(success_prob) {}
  double success_prob() const noexcept { return success_prob_; }

 private:
  double success_prob_;
};

class UnsupportedVariant : public Error {
 public:
  using Error::Error;
};

/// Malformed input file (IDX, CSV, JSON documents).
class FormatError : public Error {
 public:
  using Error::Error;
};

class InsufficientSamples : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Non-finite loss or gradient during training.
class NumericalError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace nuqml
