#pragma once

#include <cstddef>
#include <istream>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace unrestcast {

/// Input data error tied to a source location.
class DataError : public std::runtime_error {
public:
    DataError(std::string source, std::size_t line, const std::string& message);

    const std::string& source() const { return source_; }
    std::size_t line() const { return line_; }

private:
    std::string source_;
    std::size_t line_;
};

/// RFC 4180 reader: quoted fields may contain commas, doubled quotes and
/// newlines. A leading UTF-8 byte-order mark is skipped.
class CsvReader {
public:
    explicit CsvReader(std::istream& in, std::string source = "<input>");

    /// Reads the next record; false at end of input.
    bool next(std::vector<std::string>& fields);
    /// Line on which the most recently returned record started (1-based).
    std::size_t line() const { return record_line_; }
    const std::string& source() const { return source_; }

private:
    std::istream& in_;
    std::string source_;
    std::size_t line_ = 1;
    std::size_t record_line_ = 0;
    bool first_ = true;
};

/// Header-indexed access to one CSV file.
class CsvTable {
public:
    CsvTable(std::istream& in, std::string source);

    const std::vector<std::string>& header() const { return header_; }
    std::optional<std::size_t> column(std::string_view name) const;
    /// Throws DataError naming the file when the column is absent.
    std::size_t require(std::string_view name) const;

    bool next(std::vector<std::string>& fields);
    std::size_t line() const { return reader_.line(); }
    const std::string& source() const { return reader_.source(); }
    [[noreturn]] void fail(const std::string& message) const;

private:
    CsvReader reader_;
    std::vector<std::string> header_;
};

void write_csv_row(std::ostream& out, const std::vector<std::string>& fields);

/// Shortest round-trip decimal text; NaN and missing values render as "NA".
std::string format_number(double value);
std::string format_number(std::optional<double> value);

/// Strict real-number parse of the whole field.
std::optional<double> parse_number(std::string_view text);

}  // namespace unrestcast
