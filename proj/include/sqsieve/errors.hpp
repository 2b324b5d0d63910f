#pragma once

#include <sstream>
#include <stdexcept>
#include <string>

namespace sqsieve {

/// Raised when an inverse is requested for a value that shares a factor with the modulus.
class NoInverseError : public std::domain_error
{
public:
    using std::domain_error::domain_error;
};

/// Raised by exact evaluators whose estimated operation count exceeds the desk-scale guard.
class OversizeError : public std::length_error
{
public:
    using std::length_error::length_error;
};

/// Malformed user input (config or data file); carries the offending location in its message.
class InputError : public std::invalid_argument
{
public:
    using std::invalid_argument::invalid_argument;
};

/// A file could not be opened, read or written.
class IoError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

// Operation-count ceiling shared by every exact evaluator.
inline constexpr double kMaxOperations = 1e9;

inline void require(bool condition, const std::string& message)
{
    if (!condition)
        throw std::invalid_argument(message);
}

inline void guard_operations(double estimated, const std::string& what)
{
    if (estimated > kMaxOperations) {
        std::ostringstream os;
        os << what << ": estimated " << estimated << " operations exceeds the 1e9 guard; shrink the instance";
        throw OversizeError(os.str());
    }
}

} // namespace sqsieve
