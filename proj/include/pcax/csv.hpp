#pragma once

#include <cmath>
#include <cstdio>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace pcax {

// CSV emission: 12 significant digits, '.' decimal point regardless of
// locale, the literal token `inf` for divergent cells.

inline std::string csv_num(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    if (std::isnan(v)) return "nan";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

inline std::string csv_num(std::optional<double> v) {
    return v ? csv_num(*v) : std::string("inf");
}

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::vector<std::string>& add_row() {
        rows.emplace_back();
        return rows.back();
    }

    void write(std::ostream& os) const {
        write_line(os, header);
        for (const auto& r : rows) write_line(os, r);
    }

private:
    static void write_line(std::ostream& os, const std::vector<std::string>& cells) {
        for (size_t i = 0; i < cells.size(); ++i) {
            if (i) os << ',';
            os << cells[i];
        }
        os << '\n';
    }
};

}  // namespace pcax
