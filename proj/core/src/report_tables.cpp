#include "stratrand/report_tables.hpp"

#include <algorithm>
#include <ostream>

#include "stratrand/errors.hpp"

namespace stratrand {

void TextTable::add_row(std::vector<std::string> cells) {
    if (cells.size() != header_.size())
        throw ConfigMismatch("table row width mismatch");
    rows_.push_back(std::move(cells));
}

void TextTable::print(std::ostream& out, int indent) const {
    std::vector<std::size_t> width(header_.size());
    for (std::size_t c = 0; c < header_.size(); ++c) width[c] = header_[c].size();
    for (const auto& row : rows_)
        for (std::size_t c = 0; c < row.size(); ++c)
            width[c] = std::max(width[c], row[c].size());

    const std::string pad(static_cast<std::size_t>(indent), ' ');
    const auto emit = [&](const std::vector<std::string>& cells) {
        out << pad;
        for (std::size_t c = 0; c < cells.size(); ++c) {
            if (c) out << "  ";
            const auto fill = width[c] - cells[c].size();
            if (c == 0) out << cells[c] << std::string(fill, ' ');
            else out << std::string(fill, ' ') << cells[c];
        }
        out << '\n';
    };
    emit(header_);
    std::size_t total = pad.size();
    for (std::size_t c = 0; c < width.size(); ++c) total += width[c] + (c ? 2 : 0);
    out << pad << std::string(total - pad.size(), '-') << '\n';
    for (const auto& row : rows_) emit(row);
}

} // namespace stratrand
