#pragma once

#include <stdexcept>
#include <string>

namespace clockgen {

enum class Errc {
    InvalidArgument,
    Framing,
    InvalidOpcode,
    Parse,
    FieldOverlap,
    AddressRange,
    ConnectionRefused,
    AlreadyOpen,
    SessionClosed,
    Timeout,
    ConcurrentUse,
    Unsatisfiable,
    OutOfRange,
    FieldOverflow,
    InconsistentEncoding,
    Infeasible,
    NoPlan,
    Io,
};

const char* to_string(Errc code) noexcept;

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& what)
        : std::runtime_error(what), code_(code) {}

    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

// Parse failure tied to a 1-based input line (0 when not line-oriented).
class ParseError : public Error {
public:
    ParseError(std::size_t line, const std::string& what, Errc code = Errc::Parse)
        : Error(code, "line " + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

} // namespace clockgen
