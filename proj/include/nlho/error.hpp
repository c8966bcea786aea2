#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace nlho {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// malformed expression text; pos is a 0-based character offset
struct ParseError : Error {
    ParseError(const std::string& what, size_t pos_)
        : Error(what + " (at position " + std::to_string(pos_) + ")"), pos(pos_) {}
    size_t pos;
};

// violated mathematical precondition (zero denominator, degenerate metric, ...)
struct MathError : Error {
    using Error::Error;
};

} // namespace nlho
