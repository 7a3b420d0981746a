#pragma once

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <string>
#include <vector>

#include "stargaze/error.hpp"

namespace stargaze {

/// Shortest decimal form that parses back to the exact same double.
/// All file outputs go through this so reruns are byte-identical.
inline std::string format_double(double v) {
    char buf[40];
    for (int precision = 1; precision <= 17; ++precision) {
        std::snprintf(buf, sizeof(buf), "%.*g", precision, v);
        if (std::strtod(buf, nullptr) == v) break;
    }
    return buf;
}

/// Minimal CSV emitter: comma separators, '\n' line endings, '.' decimals,
/// header always present.
class CsvWriter {
public:
    explicit CsvWriter(const std::string& path) : out_(path, std::ios::binary) {
        if (!out_) throw Error("cannot open for writing: " + path);
    }

    void row(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out_ << ',';
            out_ << cells[i];
        }
        out_ << '\n';
    }

private:
    std::ofstream out_;
};

inline std::string cell(double v) { return format_double(v); }
inline std::string cell(std::size_t v) { return std::to_string(v); }
inline std::string cell(long long v) { return std::to_string(v); }
inline std::string cell(int v) { return std::to_string(v); }

}  // namespace stargaze
