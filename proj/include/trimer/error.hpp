#pragma once

#include <stdexcept>
#include <string>

namespace trimer {

// Base of every failure the library reports. Numerical failures carry enough
// context in what() for the CLI to print them verbatim.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

// Noiseless relaxation did not settle (self-pulsing or unstable parameters).
class NonConvergence : public Error {
 public:
  using Error::Error;
};

// Every trajectory diverged before the first sample time.
class AllDiverged : public Error {
 public:
  using Error::Error;
};

class EmptyAccumulator : public Error {
 public:
  using Error::Error;
};

class ZeroPopulation : public Error {
 public:
  using Error::Error;
};

class DegenerateInference : public Error {
 public:
  using Error::Error;
};

class TruncationOverflow : public Error {
 public:
  using Error::Error;
};

class UnstableDriftMatrix : public Error {
 public:
  using Error::Error;
};

class SingularAtFrequency : public Error {
 public:
  using Error::Error;
};

// The linearized output treatment was requested where the anharmonicity is
// not small against the damping.
class GaussianGuardViolation : public Error {
 public:
  using Error::Error;
};

}  // namespace trimer
