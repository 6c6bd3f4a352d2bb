#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace tensorfda {

enum class ErrorKind {
    domain,        // argument outside the function's domain
    input,         // malformed or insufficient input
    rank,          // too few samples for the requested basis
    conditioning,  // numerically singular system
    format,        // unreadable file contents
    config,        // invalid pipeline configuration
    version,       // unsupported archive version
};

/// Base class of every exception thrown by the library.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

#define TENSORFDA_DEFINE_ERROR(Name, Kind)                                     \
    class Name : public Error {                                               \
    public:                                                                   \
        explicit Name(const std::string& what) : Error(ErrorKind::Kind, what) {} \
    }

TENSORFDA_DEFINE_ERROR(DomainError, domain);
TENSORFDA_DEFINE_ERROR(InputError, input);
TENSORFDA_DEFINE_ERROR(RankError, rank);
TENSORFDA_DEFINE_ERROR(ConditioningError, conditioning);
TENSORFDA_DEFINE_ERROR(FormatError, format);
TENSORFDA_DEFINE_ERROR(ConfigError, config);
TENSORFDA_DEFINE_ERROR(VersionError, version);

#undef TENSORFDA_DEFINE_ERROR

/// Throws an error of the given kind, picking the matching subclass.
[[noreturn]] void throw_error(ErrorKind kind, const std::string& what);

/// Process exit code for an error kind: 2 configuration, 3 data format,
/// 4 numerical conditioning.
[[nodiscard]] int exit_code(ErrorKind kind) noexcept;

[[nodiscard]] std::string_view to_string(ErrorKind kind) noexcept;

}  // namespace tensorfda
