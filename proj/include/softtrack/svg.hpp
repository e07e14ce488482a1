#pragma once
#include <string>
#include <vector>

namespace softtrack {

struct SvgSeries {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
};

// Minimal standalone SVG line chart; output is well-formed XML.
void write_line_chart(const std::string& path, const std::string& title,
                      const std::string& x_label, const std::string& y_label,
                      const std::vector<SvgSeries>& series);

}  // namespace softtrack
