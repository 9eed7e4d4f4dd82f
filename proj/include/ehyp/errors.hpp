#pragma once

#include <stdexcept>
#include <string>

namespace ehyp {

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An orbit left the domain of a germ.
class DomainExit : public Error {
 public:
  DomainExit(long index, const std::string& what)
      : Error(what), index_(index) {}
  long index() const { return index_; }

 private:
  long index_;
};

/// A point was evaluated outside the ball a manifold is defined on.
class OutOfDomain : public Error {
 public:
  using Error::Error;
};

/// A subspace propagated through a window did not stay inside its cone.
class ConeEscape : public Error {
 public:
  ConeEscape(long index, const std::string& what)
      : Error(what), index_(index) {}
  long index() const { return index_; }

 private:
  long index_;
};

class ConeInvarianceFail : public Error {
 public:
  using Error::Error;
};

/// The nonlinear error exceeds the unstable linear part.
class RateOverflow : public Error {
 public:
  RateOverflow(long index, const std::string& what)
      : Error(what), index_(index) {}
  long index() const { return index_; }

 private:
  long index_;
};

class NewtonFail : public Error {
 public:
  using Error::Error;
};

/// Output of a graph transform left the admissible class (strict mode).
class ClassEscape : public Error {
 public:
  using Error::Error;
};

class CoverageFail : public Error {
 public:
  using Error::Error;
};

class NoConvergence : public Error {
 public:
  using Error::Error;
};

class ContractionFail : public Error {
 public:
  using Error::Error;
};

class IntersectionFail : public Error {
 public:
  using Error::Error;
};

class PreconditionViolated : public Error {
 public:
  using Error::Error;
};

class SeedTooLarge : public Error {
 public:
  using Error::Error;
};

class UnknownBuiltin : public Error {
 public:
  using Error::Error;
};

class OrbitMismatch : public Error {
 public:
  OrbitMismatch(long index, const std::string& what)
      : Error(what), index_(index) {}
  long index() const { return index_; }

 private:
  long index_;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace ehyp
