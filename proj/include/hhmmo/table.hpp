#pragma once

#include <cstdint>
#include <fstream>
#include <string>
#include <variant>
#include <vector>

namespace hhmmo {

using Cell = std::variant<double, std::int64_t, std::string>;

std::string format_cell(const Cell& c);

// Comma-separated table: "# <name> v<version>" line, header row, LF endings.
// Doubles are written with 17 significant digits.
class TableWriter {
public:
    TableWriter(const std::string& path, const std::string& name, int version, std::vector<std::string> columns);
    void row(const std::vector<Cell>& cells);
    void close();

private:
    std::ofstream out_;
    std::string path_;
    std::size_t width_;
};

}  // namespace hhmmo
