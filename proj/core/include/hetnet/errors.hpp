#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace hetnet {

/// Input violates a documented precondition (bad shape, out-of-range index).
class ContractError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A scenario configuration failed validation.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// An allocation violates the subchannel constraints where a valid one is required.
class ConstraintError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed dataset or model file. `line` is 1-based, `offset` is the byte
/// offset within that line when known.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, std::size_t line, std::size_t offset = 0)
        : std::runtime_error("line " + std::to_string(line) + ", offset " + std::to_string(offset) + ": " + what),
          line_(line), offset_(offset) {}

    std::size_t line() const noexcept { return line_; }
    std::size_t offset() const noexcept { return offset_; }

private:
    std::size_t line_;
    std::size_t offset_;
};

/// File format version or embedded scenario does not match what the caller expects.
class VersionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Channel standardization cannot be applied (degenerate statistics).
class PreprocessError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Relative error against a zero reference.
class UndefinedRatioError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

} // namespace hetnet
