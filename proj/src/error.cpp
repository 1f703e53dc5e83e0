#include "cellpop/error.hpp"

namespace cellpop {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
    case ErrorCode::DuplicateId: return "DuplicateId";
    case ErrorCode::NonNumericCell: return "NonNumericCell";
    case ErrorCode::RaggedRow: return "RaggedRow";
    case ErrorCode::NegativeCount: return "NegativeCount";
    case ErrorCode::EmptyFile: return "EmptyFile";
    case ErrorCode::EmptyTable: return "EmptyTable";
    case ErrorCode::EmptyHeader: return "EmptyHeader";
    case ErrorCode::NonContiguousHierarchy: return "NonContiguousHierarchy";
    case ErrorCode::MissingKey: return "MissingKey";
    case ErrorCode::UnsupportedDtype: return "UnsupportedDtype";
    case ErrorCode::UnsupportedCompressor: return "UnsupportedCompressor";
    case ErrorCode::CodeOutOfRange: return "CodeOutOfRange";
    case ErrorCode::CorruptChunk: return "CorruptChunk";
    case ErrorCode::UnsupportedFormat: return "UnsupportedFormat";
    case ErrorCode::UnknownEntity: return "UnknownEntity";
    case ErrorCode::UnknownField: return "UnknownField";
    case ErrorCode::NumericFieldNotGroupable: return "NumericFieldNotGroupable";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::InconsistentViewConfig: return "InconsistentViewConfig";
    case ErrorCode::InvalidJson: return "InvalidJson";
    case ErrorCode::ZeroGrandTotal: return "ZeroGrandTotal";
    case ErrorCode::TooFewValues: return "TooFewValues";
    case ErrorCode::Degenerate: return "Degenerate";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::DegenerateSize: return "DegenerateSize";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::Io: return "Io";
    }
    return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message, std::optional<std::size_t> line)
    : std::runtime_error(message), code_(code), line_(line) {}

} // namespace cellpop
