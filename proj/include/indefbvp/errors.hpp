#pragma once

#include <stdexcept>
#include <string>

namespace indefbvp {

/// Base class for every solver failure raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// weights
class NoSignChange : public Error {
 public:
  using Error::Error;
};
class AmbiguousStructure : public Error {
 public:
  using Error::Error;
};

// nonlinearity
class InvalidExponent : public Error {
 public:
  using Error::Error;
};

// ivp
class StepSizeUnderflow : public Error {
 public:
  StepSizeUnderflow(const std::string& what, double t_last) : Error(what), t_last(t_last) {}
  double t_last;
};
class NonFiniteState : public Error {
 public:
  NonFiniteState(const std::string& what, double t_last) : Error(what), t_last(t_last) {}
  double t_last;
};

// shooting / profiles
class AmbiguousClassification : public Error {
 public:
  using Error::Error;
};
class NoSolution : public Error {
 public:
  using Error::Error;
};

// continuation
class NewtonDiverged : public Error {
 public:
  using Error::Error;
};
class SingularJacobian : public Error {
 public:
  using Error::Error;
};
class StepUnderflow : public Error {
 public:
  using Error::Error;
};

}  // namespace indefbvp
