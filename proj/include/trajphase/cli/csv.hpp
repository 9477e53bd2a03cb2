#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace trajphase::cli {

inline constexpr int kSchemaVersion = 1;

/// Shortest locale-independent scientific form with 17 significant digits.
/// NaN is written as "nan" regardless of sign.
std::string format_double(double v);

/// CSV text with a `# trajphase-schema: <n>` first line and '\n' endings.
class CsvWriter {
public:
    explicit CsvWriter(std::vector<std::string> columns, int schema = kSchemaVersion);

    void add_row(const std::vector<double>& values);
    /// Row of preformatted cells (integers, labels).
    void add_cells(const std::vector<std::string>& cells);

    const std::string& str() const { return text_; }

private:
    std::size_t width_;
    std::string text_;
};

/// 64-bit FNV-1a, printed as 16 hex digits.
std::string fnv1a_hex(std::string_view data);

}  // namespace trajphase::cli
