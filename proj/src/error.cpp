#include "seqtag/error.hpp"

namespace seqtag {

const char* to_string(ErrorCode code) noexcept {
    switch (code) {
    case ErrorCode::invalid_argument: return "invalid argument";
    case ErrorCode::unknown_key: return "unknown key";
    case ErrorCode::io: return "i/o error";
    case ErrorCode::format: return "format error";
    case ErrorCode::truncated: return "truncated container";
    case ErrorCode::unsupported_version: return "unsupported version";
    case ErrorCode::bad_magic: return "bad magic";
    case ErrorCode::shape_mismatch: return "shape mismatch";
    case ErrorCode::empty_input: return "empty input";
    case ErrorCode::unknown_tag: return "unknown tag";
    case ErrorCode::cannot_corrupt: return "cannot corrupt";
    case ErrorCode::gradient_blowup: return "gradient blowup";
    case ErrorCode::numeric: return "numeric failure";
    }
    return "unknown error";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(message), code_(code) {}

}  // namespace seqtag
