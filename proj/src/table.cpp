#include "hhmmo/table.hpp"

#include "hhmmo/errors.hpp"

#include <fmt/format.h>

#include <cmath>

namespace hhmmo {

std::string format_cell(const Cell& c) {
    if (const double* d = std::get_if<double>(&c)) {
        if (std::isnan(*d)) return "nan";
        if (std::isinf(*d)) return *d > 0 ? "inf" : "-inf";
        return fmt::format("{:.17g}", *d);
    }
    if (const std::int64_t* i = std::get_if<std::int64_t>(&c)) return fmt::format("{}", *i);
    return std::get<std::string>(c);
}

TableWriter::TableWriter(const std::string& path, const std::string& name, int version,
                         std::vector<std::string> columns)
    : out_(path, std::ios::binary | std::ios::trunc), path_(path), width_(columns.size()) {
    if (!out_) throw std::runtime_error("cannot write " + path);
    out_ << "# " << name << " v" << version << '\n';
    for (std::size_t i = 0; i < columns.size(); ++i) out_ << (i ? "," : "") << columns[i];
    out_ << '\n';
}

void TableWriter::row(const std::vector<Cell>& cells) {
    if (cells.size() != width_) throw std::logic_error(fmt::format("{}: row has {} cells, expected {}", path_, cells.size(), width_));
    for (std::size_t i = 0; i < cells.size(); ++i) out_ << (i ? "," : "") << format_cell(cells[i]);
    out_ << '\n';
}

void TableWriter::close() {
    out_.close();
    if (!out_) throw std::runtime_error("failed writing " + path_);
}

}  // namespace hhmmo
