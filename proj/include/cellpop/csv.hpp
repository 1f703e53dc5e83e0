#ifndef CELLPOP_CSV_HPP
#define CELLPOP_CSV_HPP

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace cellpop::csv {

struct Record {
    std::vector<std::string> fields;
    std::size_t line = 0; ///< 1-based line where the record starts
};

/// Comma-separated, `"`-quoted (doubled quotes escape), `\n` or `\r\n`
/// terminated. A leading UTF-8 BOM is dropped; blank lines are skipped.
/// Throws Error(InvalidArgument) on an unterminated quote.
std::vector<Record> parse(std::string_view text);

/// Quotes the field only when it contains a comma, quote, CR or LF.
std::string escape(std::string_view field);

std::string join(const std::vector<std::string>& fields);

} // namespace cellpop::csv

#endif
