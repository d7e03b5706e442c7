#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace navnet {

enum class ErrorCode {
    io,
    empty_input,
    parse,
    not_found,
    conflict,
    schema_mismatch,
    invalid_argument,
    precondition,
};

inline std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::io: return "io_error";
        case ErrorCode::empty_input: return "empty_input";
        case ErrorCode::parse: return "parse_error";
        case ErrorCode::not_found: return "not_found";
        case ErrorCode::conflict: return "conflict";
        case ErrorCode::schema_mismatch: return "schema_mismatch";
        case ErrorCode::invalid_argument: return "invalid_argument";
        case ErrorCode::precondition: return "precondition_failed";
    }
    return "unknown";
}

/// Every failure raised by the library carries a machine-readable code.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
    throw Error(code, message);
}

}  // namespace navnet
