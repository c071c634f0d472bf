#pragma once

#include <stdexcept>
#include <string>

namespace rubricforge {

// Error categories double as CLI exit codes.
enum class ErrorKind : int {
    Config = 2,
    Data = 3,
    Backend = 4,
    Degenerate = 5,
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }
    int exit_code() const noexcept { return static_cast<int>(kind_); }

private:
    ErrorKind kind_;
};

class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what) : Error(ErrorKind::Config, what) {}
};

class DataError : public Error {
public:
    explicit DataError(const std::string& what) : Error(ErrorKind::Data, what) {}
};

class BackendError : public Error {
public:
    explicit BackendError(const std::string& what) : Error(ErrorKind::Backend, what) {}
};

// Raised for statistically undefined quantities (zero variance, single-class
// labels, unidentifiable variance components).
class DegenerateError : public Error {
public:
    explicit DegenerateError(const std::string& what) : Error(ErrorKind::Degenerate, what) {}
};

// Model output that does not match the requested format. Carries the raw text.
class ParseError : public DataError {
public:
    ParseError(const std::string& what, std::string raw)
        : DataError(what), raw_(std::move(raw)) {}
    const std::string& raw() const noexcept { return raw_; }

private:
    std::string raw_;
};

} // namespace rubricforge
