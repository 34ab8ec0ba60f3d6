#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace anygraph {

using NodeId = std::uint32_t;

/// Base class for all engine errors. The CLI maps the concrete type to a
/// machine-readable error kind on stderr.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Malformed input file (bad syntax, bad header, truncated payload).
struct ParseError : Error {
    using Error::Error;
};

/// Structurally well-formed input that violates a contract (out-of-range
/// node id, shape mismatch, empty split, ...).
struct ValidationError : Error {
    using Error::Error;
};

/// Bad or inconsistent configuration (unknown keys, checkpoint mismatch).
struct ConfigError : Error {
    using Error::Error;
};

/// Filesystem-level failure.
struct IoError : Error {
    using Error::Error;
};

}  // namespace anygraph
