#pragma once

#include <stdexcept>
#include <string>

namespace underloc {

/// Malformed input: a line, field or header that does not parse.
class ParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Well-formed input that violates a dataset invariant (dangling id,
/// duplicate id, mixed conventions, out-of-bounds keypoint, ...).
class ConsistencyError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Two operands that must agree on a dimension do not.
class DimensionMismatch : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

}  // namespace underloc
