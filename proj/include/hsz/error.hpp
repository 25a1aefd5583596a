#ifndef HSZ_ERROR_HPP
#define HSZ_ERROR_HPP

#include <stdexcept>
#include <string>
#include <string_view>

namespace hsz {

enum class ErrorCode {
    InvalidArgument,
    EpsTooSmall,
    ZeroValueRange,
    NonFinite,
    CorruptStream,
    CorruptFile,
    UnsupportedVersion,
    UnsupportedStage,
    MissingContext,
    UndefinedStd,
    ShapeMismatch,
    KindMismatch,
    Io,
};

inline std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::InvalidArgument: return "invalid-argument";
        case ErrorCode::EpsTooSmall: return "eps-too-small";
        case ErrorCode::ZeroValueRange: return "zero-value-range";
        case ErrorCode::NonFinite: return "non-finite";
        case ErrorCode::CorruptStream: return "corrupt-stream";
        case ErrorCode::CorruptFile: return "corrupt-file";
        case ErrorCode::UnsupportedVersion: return "unsupported-version";
        case ErrorCode::UnsupportedStage: return "unsupported-stage";
        case ErrorCode::MissingContext: return "missing-context";
        case ErrorCode::UndefinedStd: return "undefined-std";
        case ErrorCode::ShapeMismatch: return "shape-mismatch";
        case ErrorCode::KindMismatch: return "kind-mismatch";
        case ErrorCode::Io: return "io";
    }
    return "unknown";
}

/// Every failure raised by the library carries one of the codes above.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string &what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string &what) { throw Error(code, what); }

inline void require(bool cond, ErrorCode code, const char *what) {
    if (!cond) fail(code, what);
}

}  // namespace hsz

#endif
