#include "stratrand/csv.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "stratrand/errors.hpp"

namespace stratrand {

int CsvTable::column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == name) return static_cast<int>(i);
    return -1;
}

int CsvTable::require_column(const std::string& name) const {
    const int i = column(name);
    if (i < 0) throw DataError("missing column '" + name + "'");
    return i;
}

namespace {

// Splits a full CSV stream into records of fields, honoring quotes.
std::vector<std::vector<std::string>> parse_records(std::istream& in, const std::string& what) {
    std::vector<std::vector<std::string>> records;
    std::vector<std::string> fields;
    std::string field;
    bool quoted = false;
    bool field_started = false;   // true once the current record has content
    int line = 1;

    const auto end_field = [&] {
        fields.push_back(std::move(field));
        field.clear();
    };
    const auto end_record = [&] {
        end_field();
        records.push_back(std::move(fields));
        fields.clear();
        field_started = false;
    };

    char c;
    while (in.get(c)) {
        if (quoted) {
            if (c == '"') {
                if (in.peek() == '"') { in.get(); field.push_back('"'); }
                else quoted = false;
            } else {
                if (c == '\n') ++line;
                field.push_back(c);
            }
            continue;
        }
        switch (c) {
            case '"':
                if (!field.empty())
                    throw DataError(what + " line " + std::to_string(line) +
                                    ": quote inside unquoted field");
                quoted = true;
                field_started = true;
                break;
            case ',':
                end_field();
                field_started = true;
                break;
            case '\r':
                if (in.peek() == '\n') break;   // handled by the \n branch
                [[fallthrough]];
            case '\n':
                if (field_started || !field.empty() || !fields.empty()) end_record();
                ++line;
                break;
            default:
                field.push_back(c);
                field_started = true;
                break;
        }
    }
    if (quoted) throw DataError(what + ": unterminated quoted field");
    if (field_started || !field.empty() || !fields.empty()) end_record();
    return records;
}

} // namespace

CsvTable csv_read(std::istream& in, const std::string& what) {
    auto records = parse_records(in, what);
    if (records.empty()) throw DataError(what + ": no header row");
    CsvTable t;
    t.header = std::move(records.front());
    for (std::size_t r = 1; r < records.size(); ++r) {
        if (records[r].size() != t.header.size())
            throw DataError(what + " row " + std::to_string(r + 1) + ": " +
                            std::to_string(records[r].size()) + " fields, header has " +
                            std::to_string(t.header.size()));
        t.rows.push_back(std::move(records[r]));
    }
    return t;
}

CsvTable csv_read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open '" + path + "'");
    return csv_read(in, path);
}

namespace {

void write_field(std::ostream& out, const std::string& f) {
    const bool needs_quote = f.find_first_of(",\"\n\r") != std::string::npos;
    if (!needs_quote) {
        out << f;
        return;
    }
    out << '"';
    for (char c : f) {
        if (c == '"') out << "\"\"";
        else out << c;
    }
    out << '"';
}

void write_record(std::ostream& out, const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) out << ',';
        write_field(out, fields[i]);
    }
    out << '\n';
}

} // namespace

void csv_write(std::ostream& out, const CsvTable& table) {
    write_record(out, table.header);
    for (const auto& row : table.rows) {
        if (row.size() != table.header.size())
            throw DataError("csv_write: row width does not match header");
        write_record(out, row);
    }
}

void csv_write_file(const std::string& path, const CsvTable& table) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write '" + path + "'");
    csv_write(out, table);
}

std::string fmt_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string fmt_fixed(double v, int digits) {
    if (std::isnan(v)) return "--";
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
    return buf;
}

} // namespace stratrand
