#ifndef CELLPOP_ERROR_HPP
#define CELLPOP_ERROR_HPP

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace cellpop {

enum class ErrorCode {
    // ingestion
    DuplicateId,
    NonNumericCell,
    RaggedRow,
    NegativeCount,
    EmptyFile,
    EmptyTable,
    EmptyHeader,
    NonContiguousHierarchy,
    MissingKey,
    UnsupportedDtype,
    UnsupportedCompressor,
    CodeOutOfRange,
    CorruptChunk,
    UnsupportedFormat,
    UnknownEntity,
    // transforms and configuration
    UnknownField,
    NumericFieldNotGroupable,
    InvalidConfig,
    InconsistentViewConfig,
    InvalidJson,
    // statistics
    ZeroGrandTotal,
    TooFewValues,
    Degenerate,
    EmptyInput,
    // rendering
    DegenerateSize,
    // generic
    InvalidArgument,
    Io,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Every failure raised by the library. The code identifies the error class,
/// `what()` carries a human-readable description. Parse errors also carry the
/// 1-based line number of the offending input line when one exists.
class Error : public std::runtime_error {
  public:
    Error(ErrorCode code, const std::string& message, std::optional<std::size_t> line = std::nullopt);

    ErrorCode code() const noexcept { return code_; }
    std::optional<std::size_t> line() const noexcept { return line_; }

  private:
    ErrorCode code_;
    std::optional<std::size_t> line_;
};

} // namespace cellpop

#endif
