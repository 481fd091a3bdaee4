#ifndef INCOMPAT_ERRORS_HPP
#define INCOMPAT_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace incompat {

/// Base class for all library errors.
class Error : public std::runtime_error {
  public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

class InvalidObservable : public Error {
  public:
    using Error::Error;
};

class InvalidState : public Error {
  public:
    using Error::Error;
};

class IndexOutOfRange : public Error {
  public:
    using Error::Error;
};

class BiasedInput : public Error {
  public:
    using Error::Error;
};

class NonConvergence : public Error {
  public:
    using Error::Error;
};

/// A constructed operator set failed a positivity requirement.
class NotPositive : public Error {
  public:
    explicit NotPositive(const std::string& what, int sign_pattern = -1)
        : Error(what), pattern(sign_pattern) {}
    /// Index 0..7 of the offending sign pattern, -1 if not applicable.
    int pattern;
};

class NotSaturable : public Error {
  public:
    using Error::Error;
};

class AlreadyCompatible : public Error {
  public:
    using Error::Error;
};

class DegenerateAnchor : public Error {
  public:
    using Error::Error;
};

class NotOnBoundary : public Error {
  public:
    using Error::Error;
};

class InvalidNormal : public Error {
  public:
    using Error::Error;
};

class NotSymmetric : public Error {
  public:
    using Error::Error;
};

class OutOfRange : public Error {
  public:
    using Error::Error;
};

class RootNotBracketed : public Error {
  public:
    using Error::Error;
};

class TooLarge : public Error {
  public:
    using Error::Error;
};

class ParseError : public Error {
  public:
    using Error::Error;
};

class IoError : public Error {
  public:
    using Error::Error;
};

}  // namespace incompat

#endif  // INCOMPAT_ERRORS_HPP
