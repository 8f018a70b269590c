#ifndef CASIMIR_ERRORS_HPP
#define CASIMIR_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace casimir {

/// Base class of every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An argument lies outside the domain of a function (x <= 0, eps <= 1, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

/// A scaled special-function value does not fit in a double.
class OverflowError : public Error {
public:
    using Error::Error;
};

/// Invalid geometry: overlapping bodies, field/scatterer mismatch, unequal radii for a split.
class ConfigurationError : public Error {
public:
    using Error::Error;
};

/// A factorization met a vanishing pivot or a negative determinant where a positive one is required.
class SingularityError : public Error {
public:
    using Error::Error;
};

/// Node doubling moved the frequency integral by more than the requested tolerance.
class NonConvergenceError : public Error {
public:
    using Error::Error;
};

/// The exponential truncation fit has no solution for the supplied sequence.
class FitError : public Error {
public:
    using Error::Error;
};

/// Malformed run configuration document. The message starts with the offending key path.
class ParseError : public Error {
public:
    ParseError(const std::string& key_path, const std::string& what)
        : Error(key_path + ": " + what), key_path_(key_path) {}

    const std::string& key_path() const noexcept { return key_path_; }

private:
    std::string key_path_;
};

}  // namespace casimir

#endif  // CASIMIR_ERRORS_HPP
