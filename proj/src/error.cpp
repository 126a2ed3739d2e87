#include "bbauth/error.hpp"

namespace bbauth {

std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::MalformedDocument: return "MalformedDocument";
        case ErrorCode::SchemaViolation: return "SchemaViolation";
        case ErrorCode::InvariantViolation: return "InvariantViolation";
        case ErrorCode::EmptySeries: return "EmptySeries";
        case ErrorCode::MissingModality: return "MissingModality";
        case ErrorCode::EmptyIntersection: return "EmptyIntersection";
        case ErrorCode::BothEmpty: return "BothEmpty";
        case ErrorCode::NoKeystrokeData: return "NoKeystrokeData";
        case ErrorCode::DegenerateStroke: return "DegenerateStroke";
        case ErrorCode::NoStrokes: return "NoStrokes";
        case ErrorCode::InsufficientEvents: return "InsufficientEvents";
        case ErrorCode::SignalTooShort: return "SignalTooShort";
        case ErrorCode::TooFewColumns: return "TooFewColumns";
        case ErrorCode::ShapeMismatch: return "ShapeMismatch";
        case ErrorCode::EmptySequence: return "EmptySequence";
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::DegeneratePairs: return "DegeneratePairs";
        case ErrorCode::ConfigInvalid: return "ConfigInvalid";
        case ErrorCode::IncompleteDevice: return "IncompleteDevice";
        case ErrorCode::EmptyDistribution: return "EmptyDistribution";
        case ErrorCode::MissingScore: return "MissingScore";
        case ErrorCode::DuplicateScore: return "DuplicateScore";
        case ErrorCode::NonFiniteScore: return "NonFiniteScore";
        case ErrorCode::MalformedScoreFile: return "MalformedScoreFile";
        case ErrorCode::MatcherTaskMismatch: return "MatcherTaskMismatch";
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::Io: return "Io";
    }
    return "Unknown";
}

}  // namespace bbauth
