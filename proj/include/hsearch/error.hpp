#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace hsearch {

enum class ErrorCode {
    MalformedRecord,
    DuplicateDocId,
    EmptyCorpus,
    UnknownDocId,
    OffsetOutOfBounds,
    UnknownCategory,
    OverlapConflict,
    GazetteerConflict,
    EmptySubset,
    EmptyVocabulary,
    DimensionMismatch,
    MalformedModelFile,
    UnknownClusterId,
    UnknownDoc,
    InvalidPage,
    InvalidArgument,
    IoError,
    DegenerateAgreement,
    DomainMismatch,
    ParseError,
    EmptyIntersection,
    IncompatibleSnapshot,
};

std::string_view to_string(ErrorCode code);

// Every failure surfaced by the library. Parse-style errors carry the
// 1-based line number of the offending input line.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message, std::optional<std::size_t> line = std::nullopt);

    ErrorCode code() const noexcept { return code_; }
    std::optional<std::size_t> line() const noexcept { return line_; }
    // The message without the code and line prefix.
    const std::string& message() const noexcept { return message_; }

private:
    ErrorCode code_;
    std::string message_;
    std::optional<std::size_t> line_;
};

}  // namespace hsearch
