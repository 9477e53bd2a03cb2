#include "trajphase/cli/csv.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>

#include "trajphase/errors.hpp"

namespace trajphase::cli {

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    std::array<char, 40> buf{};
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v, std::chars_format::scientific, 16);
    return {buf.data(), res.ptr};
}

CsvWriter::CsvWriter(std::vector<std::string> columns, int schema) : width_(columns.size()) {
    text_ = "# trajphase-schema: " + std::to_string(schema) + "\n";
    for (std::size_t i = 0; i < columns.size(); ++i) {
        if (i) text_ += ',';
        text_ += columns[i];
    }
    text_ += '\n';
}

void CsvWriter::add_row(const std::vector<double>& values) {
    std::vector<std::string> cells;
    cells.reserve(values.size());
    for (double v : values) cells.push_back(format_double(v));
    add_cells(cells);
}

void CsvWriter::add_cells(const std::vector<std::string>& cells) {
    if (cells.size() != width_) throw InvalidArgument("CsvWriter: row width does not match the header");
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) text_ += ',';
        text_ += cells[i];
    }
    text_ += '\n';
}

std::string fnv1a_hex(std::string_view data) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace trajphase::cli
