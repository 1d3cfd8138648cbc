#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace stratrand {

// Minimal RFC-4180 table: header row plus string cells. Quoted fields may
// contain commas, escaped quotes and newlines; every row must match the
// header width.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    int column(const std::string& name) const;            // -1 when absent
    int require_column(const std::string& name) const;    // throws DataError
};

CsvTable csv_read(std::istream& in, const std::string& what);
CsvTable csv_read_file(const std::string& path);
void csv_write(std::ostream& out, const CsvTable& table);
void csv_write_file(const std::string& path, const CsvTable& table);

// Full-precision, locale-independent rendering ("%.17g"): identical doubles
// always produce identical bytes.
std::string fmt_g17(double v);
// Fixed-point rendering with the given digits ("%.4f" style); NaN -> "--".
std::string fmt_fixed(double v, int digits);

} // namespace stratrand
