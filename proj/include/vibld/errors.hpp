#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace vibld {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A tabulated curve was queried outside its sampled range.
class ExtrapolationError : public Error {
 public:
  using Error::Error;
};

/// Tabulated data violates an ordering or size invariant.
class FormatError : public Error {
 public:
  using Error::Error;
};

class InsufficientDataError : public FormatError {
 public:
  using FormatError::FormatError;
};

/// A token could not be read as a number.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error(what + " (line " + std::to_string(line) + ")"), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class EmptySpectrumError : public Error {
 public:
  using Error::Error;
};

/// Ladder transition energies do not increase down the ladder, so no
/// positive chirp can follow the resonances.
class ChirpSignError : public Error {
 public:
  using Error::Error;
};

class HeuristicFailure : public Error {
 public:
  using Error::Error;
};

class NumericalBlowup : public Error {
 public:
  NumericalBlowup(const std::string& what, std::size_t step)
      : Error(what + " at step " + std::to_string(step)), step_(step) {}
  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace vibld
