#pragma once

#include <stdexcept>
#include <string>

namespace slx {

// Error categories map one-to-one onto CLI exit codes (see tools/).
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Filesystem-level failure: missing file, unreadable path, write failure.
class IoError : public Error {
public:
    using Error::Error;
};

// Malformed input text. Carries the source location when known.
class ParseError : public Error {
public:
    ParseError(const std::string& msg, std::string file = {}, std::size_t line = 0)
        : Error(format(msg, file, line)), file_(std::move(file)), line_(line) {}

    const std::string& file() const { return file_; }
    std::size_t line() const { return line_; }

private:
    static std::string format(const std::string& msg, const std::string& file, std::size_t line) {
        if (file.empty()) return msg;
        std::string s = file;
        if (line > 0) s += ":" + std::to_string(line);
        return s + ": " + msg;
    }

    std::string file_;
    std::size_t line_;
};

// Structurally valid input that breaks a domain invariant.
class ValidationError : public Error {
public:
    using Error::Error;
};

// Numeric-domain violation: non-positive Q, non-TLS-limited pair,
// meaningless upper bound, solver dimension mismatch.
class DomainError : public Error {
public:
    using Error::Error;
};

}  // namespace slx
