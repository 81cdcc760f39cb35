#ifndef SOFTMC_ERRORS_HPP
#define SOFTMC_ERRORS_HPP

#include <cstdint>
#include <stdexcept>
#include <string>

namespace softmc {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// An address or size fell outside the bound device geometry, or the
/// geometry itself is unrepresentable.
class GeometryError : public Error {
public:
    using Error::Error;
};

/// Insertion into a sequence that already ends in END.
class SealedSequenceError : public Error {
public:
    using Error::Error;
};

/// A 64-bit word or a binary stream failed structural decoding.
/// byte_offset is the position of the offending word within the stream
/// (0 for single-word decode failures).
class CodecError : public Error {
public:
    CodecError(const std::string& what, std::uint64_t byte_offset = 0)
        : Error(what), byte_offset(byte_offset) {}
    std::uint64_t byte_offset;
};

/// Structured-text input (trace files, params files, profiles, campaign
/// configs) failed to parse. line is 1-based when known, 0 otherwise.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::uint64_t line = 0)
        : Error(what), line(line) {}
    std::uint64_t line;
};

/// Semantically invalid configuration (profile fields out of range,
/// empty plan axes, bad temperature, ...).
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Filesystem-level failure (missing input, unwritable output).
class IoError : public Error {
public:
    using Error::Error;
};

} // namespace softmc

#endif
