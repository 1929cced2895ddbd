#include "pragrank/error.hpp"

namespace pragrank {

ErrorCategory category_of(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::SchemaError:
        case ErrorCode::DuplicateId:
            return ErrorCategory::Schema;
        case ErrorCode::BackendUnavailable:
        case ErrorCode::BackendProtocol:
        case ErrorCode::TokenizationOverflow:
        case ErrorCode::UnsupportedDecoding:
            return ErrorCategory::Backend;
        default:
            return ErrorCategory::Precondition;
    }
}

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::SchemaError: return "SchemaError";
        case ErrorCode::DuplicateId: return "DuplicateId";
        case ErrorCode::BackendUnavailable: return "BackendUnavailable";
        case ErrorCode::BackendProtocol: return "BackendProtocol";
        case ErrorCode::TokenizationOverflow: return "TokenizationOverflow";
        case ErrorCode::UnsupportedDecoding: return "UnsupportedDecoding";
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::LambdaOutOfRange: return "LambdaOutOfRange";
        case ErrorCode::AlphaOutOfRange: return "AlphaOutOfRange";
        case ErrorCode::MissingScore: return "MissingScore";
        case ErrorCode::EmptyPool: return "EmptyPool";
        case ErrorCode::MissingPlaceholder: return "MissingPlaceholder";
        case ErrorCode::EmptyReferences: return "EmptyReferences";
        case ErrorCode::EmptyDataset: return "EmptyDataset";
        case ErrorCode::GridEmpty: return "GridEmpty";
        case ErrorCode::IoError: return "IoError";
        case ErrorCode::Interrupted: return "Interrupted";
    }
    return "Unknown";
}

int exit_code_of(ErrorCode code) noexcept {
    switch (category_of(code)) {
        case ErrorCategory::Schema: return 2;
        case ErrorCategory::Backend: return 3;
        case ErrorCategory::Precondition: return 4;
    }
    return 1;
}

}  // namespace pragrank
