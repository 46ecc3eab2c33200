#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace sgaudit {

enum class ErrorKind {
    Validation,
    NotFound,
    Conflict,   // illegal state transition (e.g. applying a suggestion twice)
    Schema,     // malformed adapter response
    Transport,  // adapter unreachable or failed; retryable
    Timeout,
    Digest,
    Io,
};

std::string_view to_string(ErrorKind kind);

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message) : std::runtime_error(message), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

#define SGAUDIT_DEFINE_ERROR(Name, Kind)                                          \
    class Name : public Error {                                                   \
    public:                                                                       \
        explicit Name(const std::string& message) : Error(ErrorKind::Kind, message) {} \
    };

SGAUDIT_DEFINE_ERROR(ValidationError, Validation)
SGAUDIT_DEFINE_ERROR(NotFoundError, NotFound)
SGAUDIT_DEFINE_ERROR(ConflictError, Conflict)
SGAUDIT_DEFINE_ERROR(SchemaError, Schema)
SGAUDIT_DEFINE_ERROR(TransportError, Transport)
SGAUDIT_DEFINE_ERROR(TimeoutError, Timeout)
SGAUDIT_DEFINE_ERROR(DigestError, Digest)
SGAUDIT_DEFINE_ERROR(IoError, Io)

#undef SGAUDIT_DEFINE_ERROR

}  // namespace sgaudit
