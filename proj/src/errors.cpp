#include "tensorfda/errors.hpp"

namespace tensorfda {

void throw_error(ErrorKind kind, const std::string& what) {
    switch (kind) {
        case ErrorKind::domain: throw DomainError(what);
        case ErrorKind::input: throw InputError(what);
        case ErrorKind::rank: throw RankError(what);
        case ErrorKind::conditioning: throw ConditioningError(what);
        case ErrorKind::format: throw FormatError(what);
        case ErrorKind::config: throw ConfigError(what);
        case ErrorKind::version: throw VersionError(what);
    }
    throw Error(kind, what);
}

int exit_code(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::config:
        case ErrorKind::input:
        case ErrorKind::domain:
        case ErrorKind::rank: return 2;
        case ErrorKind::format:
        case ErrorKind::version: return 3;
        case ErrorKind::conditioning: return 4;
    }
    return 1;
}

std::string_view to_string(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::domain: return "domain error";
        case ErrorKind::input: return "input error";
        case ErrorKind::rank: return "rank error";
        case ErrorKind::conditioning: return "conditioning error";
        case ErrorKind::format: return "format error";
        case ErrorKind::config: return "configuration error";
        case ErrorKind::version: return "unsupported version";
    }
    return "error";
}

}  // namespace tensorfda
