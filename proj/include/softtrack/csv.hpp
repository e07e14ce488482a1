#pragma once
#include <fstream>
#include <string>
#include <vector>

#include "softtrack/errors.hpp"

namespace softtrack {

// Deterministic numeric formatting shared by every CSV writer.
std::string fmt_num(double v);

class CsvWriter {
  public:
    CsvWriter(const std::string& path, const std::vector<std::string>& header);

    template <typename... Ts>
    void row(Ts... vals) {
        bool first = true;
        ((out_ << (first ? "" : ",") << cell(vals), first = false), ...);
        out_ << "\n";
    }

    void row_vec(const std::vector<double>& vals) {
        for (size_t i = 0; i < vals.size(); ++i) out_ << (i ? "," : "") << fmt_num(vals[i]);
        out_ << "\n";
    }

  private:
    static std::string cell(double v) { return fmt_num(v); }
    static std::string cell(int v) { return std::to_string(v); }
    static std::string cell(long v) { return std::to_string(v); }
    static std::string cell(const char* v) { return v; }
    static std::string cell(const std::string& v) { return v; }

    std::ofstream out_;
};

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;

    int col(const std::string& name) const;       // -1 when absent
    int require(const std::string& name) const;   // throws on absence
};

CsvTable read_csv(const std::string& path);

}  // namespace softtrack
