#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace zqual {

/// Base class of every error raised by the toolkit.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed or invalid configuration text. Line and column are 1-based; 0 means unknown.
class ConfigError : public Error {
public:
    ConfigError(std::size_t line, std::size_t column, const std::string& what)
        : Error(line == 0 ? what
                          : "line " + std::to_string(line) + ", column " + std::to_string(column) +
                                ": " + what),
          line_(line), column_(column) {}

    [[nodiscard]] std::size_t line() const noexcept { return line_; }
    [[nodiscard]] std::size_t column() const noexcept { return column_; }

private:
    std::size_t line_;
    std::size_t column_;
};

/// Problems with dataset bytes, shapes or values.
class DataError : public Error {
public:
    using Error::Error;
};

/// A metric that has no defined value for the input (zero variance, zero range).
class UndefinedMetric : public Error {
public:
    using Error::Error;
};

/// Launching or running an external compressor failed.
class ProcessError : public Error {
public:
    ProcessError(const std::string& what, int exit_status = -1, std::string stderr_text = {})
        : Error(what), exit_status_(exit_status), stderr_text_(std::move(stderr_text)) {}

    [[nodiscard]] int exit_status() const noexcept { return exit_status_; }
    [[nodiscard]] const std::string& stderr_text() const noexcept { return stderr_text_; }

private:
    int exit_status_;
    std::string stderr_text_;
};

class NotFound : public Error {
public:
    using Error::Error;
};

class BadRequest : public Error {
public:
    using Error::Error;
};

}  // namespace zqual
