#pragma once

#include <stdexcept>
#include <string>

namespace smc {

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed or inconsistent input file / document.
class ParseError : public Error {
 public:
  using Error::Error;
};

/// Kernel violates its invariants (row masses, range, zero sojourn mass).
class InvalidKernel : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class NonzeroAtZero : public Error {
 public:
  using Error::Error;
};

class NegativeTail : public Error {
 public:
  using Error::Error;
};

class EmptySubset : public Error {
 public:
  using Error::Error;
};

class NotIrreducible : public Error {
 public:
  using Error::Error;
};

class TimeBeyondHorizon : public Error {
 public:
  using Error::Error;
};

/// Raised by estimators that need observed data which the trajectory lacks.
class DataInsufficiency : public Error {
 public:
  using Error::Error;
};

class EmptyTrajectory : public DataInsufficiency {
 public:
  using DataInsufficiency::DataInsufficiency;
};

class UnvisitedState : public DataInsufficiency {
 public:
  using DataInsufficiency::DataInsufficiency;
};

class BadLevel : public Error {
 public:
  using Error::Error;
};

}  // namespace smc
