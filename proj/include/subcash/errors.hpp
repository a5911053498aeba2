#pragma once

#include <stdexcept>
#include <string>

namespace subcash {

/// Error categories double as CLI exit codes.
enum class ErrorKind : int {
    Parse = 2,
    Validation = 3,
    Numeric = 4,
    Capacity = 5,
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }
    int exit_code() const noexcept { return static_cast<int>(kind_); }

private:
    ErrorKind kind_;
};

struct ParseError : Error {
    explicit ParseError(const std::string& what) : Error(ErrorKind::Parse, what) {}
};

struct ValidationError : Error {
    explicit ValidationError(const std::string& what) : Error(ErrorKind::Validation, what) {}
};

struct NumericError : Error {
    explicit NumericError(const std::string& what) : Error(ErrorKind::Numeric, what) {}
};

struct CapacityError : Error {
    explicit CapacityError(const std::string& what) : Error(ErrorKind::Capacity, what) {}
};

}  // namespace subcash
