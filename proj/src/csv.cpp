#include "softtrack/csv.hpp"

#include <cstdio>
#include <cstdlib>
#include <sstream>

namespace softtrack {

std::string fmt_num(double v) {
    // 17 significant digits: doubles survive the write/parse round trip exactly
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

CsvWriter::CsvWriter(const std::string& path, const std::vector<std::string>& header)
    : out_(path) {
    if (!out_) throw Error("cannot write " + path);
    for (size_t i = 0; i < header.size(); ++i) out_ << (i ? "," : "") << header[i];
    out_ << "\n";
}

int CsvTable::col(const std::string& name) const {
    for (size_t i = 0; i < header.size(); ++i) {
        if (header[i] == name) return static_cast<int>(i);
    }
    return -1;
}

int CsvTable::require(const std::string& name) const {
    const int c = col(name);
    if (c < 0) throw Error("CSV is missing column " + name);
    return c;
}

CsvTable read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot read " + path);
    CsvTable table;
    std::string line;
    if (!std::getline(in, line)) throw Error("empty CSV " + path);
    std::stringstream hs(line);
    std::string cell;
    while (std::getline(hs, cell, ',')) table.header.push_back(cell);

    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<double> row;
        row.reserve(table.header.size());
        const char* p = line.c_str();
        char* end = nullptr;
        while (true) {
            row.push_back(std::strtod(p, &end));
            if (*end != ',') break;
            p = end + 1;
        }
        if (row.size() != table.header.size()) throw Error("ragged CSV row in " + path);
        table.rows.push_back(std::move(row));
    }
    return table;
}

}  // namespace softtrack
