#ifndef AVALANCHE_ERRORS_HPP
#define AVALANCHE_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace avalanche {

/// Base class for all recoverable errors raised by this library.
/// Validation failures (bad inputs, violated preconditions) derive from
/// this; anything else escaping the library is a genuine bug.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Geodesic through two points with equal mu: the vertical line has no
/// finite (mu_c, R) semicircle representation.
class VerticalGeodesicError : public Error {
public:
    explicit VerticalGeodesicError(const std::string& msg) : Error(msg) {}
};

class CoincidentPointsError : public Error {
public:
    explicit CoincidentPointsError(const std::string& msg) : Error(msg) {}
};

/// Two points expected on a common Sharpe ray (mu/sigma equal) are not.
class SharpeMismatchError : public Error {
public:
    explicit SharpeMismatchError(const std::string& msg) : Error(msg) {}
};

/// Point sits at the top of the semicircle where dmu/dsigma is unbounded.
class ApexSingularityError : public Error {
public:
    explicit ApexSingularityError(const std::string& msg) : Error(msg) {}
};

class ZeroDeltaError : public Error {
public:
    explicit ZeroDeltaError(const std::string& msg) : Error(msg) {}
};

class InsufficientTailError : public Error {
public:
    explicit InsufficientTailError(const std::string& msg) : Error(msg) {}
};

class NonConvergenceError : public Error {
public:
    explicit NonConvergenceError(const std::string& msg) : Error(msg) {}
};

class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& msg) : Error(msg) {}
};

}  // namespace avalanche

#endif  // AVALANCHE_ERRORS_HPP
