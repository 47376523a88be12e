#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace cbd::csv {

using Row = std::vector<std::string>;

struct Table {
    Row header;
    std::vector<Row> rows;
    // 1-based physical line on which each row starts (for error messages).
    std::vector<std::size_t> lines;

    /// Index of a header column, or throws DataError naming the column.
    std::size_t column(std::string_view name) const;
};

/// RFC 4180 parsing: comma separated, double-quote quoting with "" escapes,
/// quoted fields may span lines, CRLF or LF line endings. A UTF-8 BOM on the
/// first line is skipped. Throws DataError on an unterminated quoted field or
/// a row whose field count differs from the header.
Table parse(std::string_view text);
Table read_file(const std::filesystem::path& path);

/// Quote a field when it contains a comma, quote, CR or LF.
std::string escape(std::string_view field);
void write_row(std::ostream& out, const Row& row);

}  // namespace cbd::csv
