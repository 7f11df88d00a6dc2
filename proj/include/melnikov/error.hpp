#pragma once

#include <stdexcept>
#include <string>

namespace melnikov {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// A closed-form expression hit a zero denominator.
class SingularPoint : public Error {
 public:
  using Error::Error;
};

/// Evaluation at a pole of a Baker-Akhiezer function.
class PoleAtDivisor : public Error {
 public:
  using Error::Error;
};

class PoleAtMarkedPoint : public Error {
 public:
  using Error::Error;
};

class NotInAnnihilationRegime : public Error {
 public:
  using Error::Error;
};

class ContourTooSmall : public Error {
 public:
  using Error::Error;
};

/// Energy too close to a root of Delta^2 - 4 for the Bloch pair to exist.
class DegenerateEnergy : public Error {
 public:
  using Error::Error;
};

/// The adaptive ODE integrator could not make progress.
class StepUnderflow : public Error {
 public:
  using Error::Error;
};

class SingularBASystem : public Error {
 public:
  using Error::Error;
};

class NonConvergentDirection : public Error {
 public:
  using Error::Error;
};

class NotKdVSymmetric : public Error {
 public:
  using Error::Error;
};

class BoxTooSmall : public Error {
 public:
  using Error::Error;
};

class BlowUp : public Error {
 public:
  using Error::Error;
};

class UnstableTimeStep : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace melnikov
