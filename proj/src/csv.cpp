#include "unrestcast/csv.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

#include <fmt/format.h>

namespace unrestcast {

DataError::DataError(std::string source, std::size_t line, const std::string& message)
    : std::runtime_error(fmt::format("{}:{}: {}", source, line, message)), source_(std::move(source)), line_(line) {}

CsvReader::CsvReader(std::istream& in, std::string source) : in_(in), source_(std::move(source)) {}

bool CsvReader::next(std::vector<std::string>& fields) {
    fields.clear();
    if (first_) {
        first_ = false;
        if (in_.peek() == 0xEF) {
            char bom[3];
            in_.read(bom, 3);
        }
    }
    if (in_.peek() == std::char_traits<char>::eof()) return false;

    record_line_ = line_;
    std::string field;
    bool quoted = false;
    bool any = false;
    char c;
    while (in_.get(c)) {
        any = true;
        if (quoted) {
            if (c == '"') {
                if (in_.peek() == '"') {
                    in_.get(c);
                    field.push_back('"');
                } else {
                    quoted = false;
                }
            } else {
                if (c == '\n') ++line_;
                field.push_back(c);
            }
            continue;
        }
        if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(field));
            field.clear();
        } else if (c == '\r') {
            continue;
        } else if (c == '\n') {
            ++line_;
            break;
        } else {
            field.push_back(c);
        }
    }
    if (quoted) throw DataError(source_, record_line_, "unterminated quoted field");
    if (!any) return false;
    fields.push_back(std::move(field));
    return true;
}

CsvTable::CsvTable(std::istream& in, std::string source) : reader_(in, std::move(source)) {
    if (!reader_.next(header_)) throw DataError(reader_.source(), 1, "missing header row");
    for (auto& h : header_) {
        h.erase(0, h.find_first_not_of(" \t"));
        h.erase(h.find_last_not_of(" \t") + 1);
    }
}

std::optional<std::size_t> CsvTable::column(std::string_view name) const {
    auto it = std::find(header_.begin(), header_.end(), name);
    if (it == header_.end()) return std::nullopt;
    return static_cast<std::size_t>(it - header_.begin());
}

std::size_t CsvTable::require(std::string_view name) const {
    auto c = column(name);
    if (!c) throw DataError(source(), 1, fmt::format("missing column '{}'", name));
    return *c;
}

bool CsvTable::next(std::vector<std::string>& fields) {
    while (reader_.next(fields)) {
        if (fields.size() == 1 && fields[0].empty()) continue;
        if (fields.size() != header_.size()) {
            fail(fmt::format("expected {} fields, found {}", header_.size(), fields.size()));
        }
        return true;
    }
    return false;
}

void CsvTable::fail(const std::string& message) const { throw DataError(source(), line(), message); }

void write_csv_row(std::ostream& out, const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) out << ',';
        const auto& f = fields[i];
        if (f.find_first_of(",\"\n\r") == std::string::npos) {
            out << f;
            continue;
        }
        out << '"';
        for (char c : f) {
            if (c == '"') out << '"';
            out << c;
        }
        out << '"';
    }
    out << '\n';
}

std::string format_number(double value) {
    if (std::isnan(value)) return "NA";
    if (std::isinf(value)) return value > 0 ? "Inf" : "-Inf";
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, ptr);
}

std::string format_number(std::optional<double> value) { return value ? format_number(*value) : "NA"; }

std::optional<double> parse_number(std::string_view text) {
    while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
    while (!text.empty() && (text.back() == ' ' || text.back() == '\t')) text.remove_suffix(1);
    if (text.empty()) return std::nullopt;
    if (text.front() == '+') text.remove_prefix(1);
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || ptr != text.data() + text.size()) return std::nullopt;
    return v;
}

}  // namespace unrestcast
