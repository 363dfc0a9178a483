#pragma once

#include <stdexcept>
#include <string>

namespace alf {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid parameters: malformed configs, out-of-range epsilon/delta, bad sample specs.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Evaluation point outside the admissible domain of a chart.
class DomainError : public Error {
 public:
  using Error::Error;
};

// Evaluation point inside the excluded cone around a Dirac string.
class GaugeError : public Error {
 public:
  using Error::Error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

class DefiniteError : public Error {
 public:
  using Error::Error;
};

class PositivityError : public Error {
 public:
  using Error::Error;
};

class FrameError : public Error {
 public:
  using Error::Error;
};

class FitError : public Error {
 public:
  using Error::Error;
};

}  // namespace alf
