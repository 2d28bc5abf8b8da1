#pragma once

#include <stdexcept>
#include <string>

namespace seqtag {

enum class ErrorCode {
    invalid_argument,
    unknown_key,
    io,
    format,
    truncated,
    unsupported_version,
    bad_magic,
    shape_mismatch,
    empty_input,
    unknown_tag,
    cannot_corrupt,
    gradient_blowup,
    numeric,
};

const char* to_string(ErrorCode code) noexcept;

/// Every failure raised by the library carries one of the codes above so the
/// C boundary can translate it without string matching.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message);

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace seqtag
