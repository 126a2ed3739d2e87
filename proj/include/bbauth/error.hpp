#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace bbauth {

enum class ErrorCode {
    MalformedDocument,
    SchemaViolation,
    InvariantViolation,
    EmptySeries,
    MissingModality,
    EmptyIntersection,
    BothEmpty,
    NoKeystrokeData,
    DegenerateStroke,
    NoStrokes,
    InsufficientEvents,
    SignalTooShort,
    TooFewColumns,
    ShapeMismatch,
    EmptySequence,
    DimensionMismatch,
    DegeneratePairs,
    ConfigInvalid,
    IncompleteDevice,
    EmptyDistribution,
    MissingScore,
    DuplicateScore,
    NonFiniteScore,
    MalformedScoreFile,
    MatcherTaskMismatch,
    InvalidArgument,
    Io,
};

std::string_view to_string(ErrorCode code);

/// Every failure raised by the library carries one of the codes above so
/// callers (and the CLI exit-code map) can dispatch without string matching.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace bbauth
