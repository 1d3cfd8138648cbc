#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace stratrand {

// Plain-text aligned table for terminal reports. The first column is
// left-justified, the rest right-justified.
class TextTable {
public:
    explicit TextTable(std::vector<std::string> header) : header_(std::move(header)) {}
    void add_row(std::vector<std::string> cells);
    void print(std::ostream& out, int indent = 0) const;

private:
    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
};

} // namespace stratrand
