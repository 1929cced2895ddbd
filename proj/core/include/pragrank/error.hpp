#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace pragrank {

enum class ErrorCode {
    // schema / data file problems
    SchemaError,
    DuplicateId,
    // backend problems
    BackendUnavailable,
    BackendProtocol,
    TokenizationOverflow,
    UnsupportedDecoding,
    // precondition violations
    InvalidArgument,
    LambdaOutOfRange,
    AlphaOutOfRange,
    MissingScore,
    EmptyPool,
    MissingPlaceholder,
    EmptyReferences,
    EmptyDataset,
    GridEmpty,
    IoError,
    Interrupted,
};

enum class ErrorCategory { Schema, Backend, Precondition };

ErrorCategory category_of(ErrorCode code) noexcept;
std::string_view to_string(ErrorCode code) noexcept;

// Process exit code for the CLI: 2 schema, 3 backend, 4 precondition.
int exit_code_of(ErrorCode code) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }
    ErrorCategory category() const noexcept { return category_of(code_); }

    const std::string& file() const noexcept { return file_; }
    std::optional<std::size_t> line() const noexcept { return line_; }

    // Attach file/line context while propagating.
    Error& at(std::string file, std::optional<std::size_t> line = std::nullopt) {
        file_ = std::move(file);
        line_ = line;
        return *this;
    }

private:
    ErrorCode code_;
    std::string file_;
    std::optional<std::size_t> line_;
};

}  // namespace pragrank
