#pragma once

#include <stdexcept>
#include <string>

namespace coac {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input text (JSON syntax, SU grammar).
class ParseError : public Error {
public:
    using Error::Error;
};

/// Well-formed input that violates a domain invariant.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// Arguments outside an operation's supported domain.
class PreconditionError : public Error {
public:
    using Error::Error;
};

namespace detail {

constexpr bool is_power_of_two(long long x) noexcept { return x > 0 && (x & (x - 1)) == 0; }

constexpr long long ceil_div(long long a, long long b) noexcept { return (a + b - 1) / b; }

inline void require(bool cond, const std::string& what) {
    if (!cond) throw PreconditionError(what);
}

} // namespace detail
} // namespace coac
