#include "softtrack/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "softtrack/errors.hpp"

namespace softtrack {

namespace {

// display precision only; data fidelity lives in the CSVs
std::string fmt_num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

constexpr int kWidth = 900;
constexpr int kHeight = 320;
constexpr int kMarginL = 70, kMarginR = 130, kMarginT = 40, kMarginB = 50;

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

std::string esc(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

// round limits to a tidy tick step
double nice_step(double span) {
    const double raw = span / 6.0;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    for (double m : {1.0, 2.0, 5.0, 10.0}) {
        if (raw <= m * mag) return m * mag;
    }
    return 10.0 * mag;
}

}  // namespace

void write_line_chart(const std::string& path, const std::string& title,
                      const std::string& x_label, const std::string& y_label,
                      const std::vector<SvgSeries>& series) {
    double x_min = 1e300, x_max = -1e300, y_min = 1e300, y_max = -1e300;
    for (const auto& s : series) {
        for (double v : s.x) { x_min = std::min(x_min, v); x_max = std::max(x_max, v); }
        for (double v : s.y) { y_min = std::min(y_min, v); y_max = std::max(y_max, v); }
    }
    if (x_min > x_max) { x_min = 0.0; x_max = 1.0; }
    if (y_min > y_max) { y_min = 0.0; y_max = 1.0; }
    if (y_max - y_min < 1e-12) { y_max += 1.0; y_min -= 1.0; }
    const double pad = 0.04 * (y_max - y_min);
    y_min -= pad;
    y_max += pad;

    const double plot_w = kWidth - kMarginL - kMarginR;
    const double plot_h = kHeight - kMarginT - kMarginB;
    auto px = [&](double x) { return kMarginL + (x - x_min) / (x_max - x_min) * plot_w; };
    auto py = [&](double y) { return kMarginT + (y_max - y) / (y_max - y_min) * plot_h; };

    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path);
    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth
        << "\" height=\"" << kHeight << "\" viewBox=\"0 0 " << kWidth << " " << kHeight
        << "\">\n";
    out << "<rect width=\"" << kWidth << "\" height=\"" << kHeight << "\" fill=\"white\"/>\n";
    out << "<text x=\"" << kWidth / 2 << "\" y=\"22\" text-anchor=\"middle\" "
        << "font-family=\"sans-serif\" font-size=\"15\">" << esc(title) << "</text>\n";

    // axes box and ticks
    out << "<rect x=\"" << kMarginL << "\" y=\"" << kMarginT << "\" width=\"" << plot_w
        << "\" height=\"" << plot_h << "\" fill=\"none\" stroke=\"#333333\"/>\n";
    const double xs = nice_step(x_max - x_min);
    for (double x = std::ceil(x_min / xs) * xs; x <= x_max + 1e-9; x += xs) {
        out << "<line x1=\"" << px(x) << "\" y1=\"" << kMarginT + plot_h << "\" x2=\"" << px(x)
            << "\" y2=\"" << kMarginT + plot_h + 5 << "\" stroke=\"#333333\"/>\n";
        out << "<text x=\"" << px(x) << "\" y=\"" << kMarginT + plot_h + 18
            << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">"
            << fmt_num(x) << "</text>\n";
    }
    const double ys = nice_step(y_max - y_min);
    for (double y = std::ceil(y_min / ys) * ys; y <= y_max + 1e-9; y += ys) {
        out << "<line x1=\"" << kMarginL - 5 << "\" y1=\"" << py(y) << "\" x2=\"" << kMarginL
            << "\" y2=\"" << py(y) << "\" stroke=\"#333333\"/>\n";
        out << "<text x=\"" << kMarginL - 8 << "\" y=\"" << py(y) + 4
            << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">"
            << fmt_num(y) << "</text>\n";
    }
    out << "<text x=\"" << kMarginL + plot_w / 2 << "\" y=\"" << kHeight - 10
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">"
        << esc(x_label) << "</text>\n";
    out << "<text x=\"16\" y=\"" << kMarginT + plot_h / 2
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" "
        << "transform=\"rotate(-90 16 " << kMarginT + plot_h / 2 << ")\">" << esc(y_label)
        << "</text>\n";

    for (size_t si = 0; si < series.size(); ++si) {
        const auto& s = series[si];
        const char* color = kPalette[si % 6];
        // cap polyline length; stride keeps the output compact and deterministic
        const size_t stride = std::max<size_t>(1, s.x.size() / 4000);
        out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.2\" points=\"";
        for (size_t i = 0; i < s.x.size(); i += stride) {
            out << fmt_num(px(s.x[i])) << "," << fmt_num(py(s.y[i])) << " ";
        }
        out << "\"/>\n";
        const double ly = kMarginT + 14 + 16 * static_cast<double>(si);
        out << "<line x1=\"" << kWidth - kMarginR + 8 << "\" y1=\"" << ly - 4 << "\" x2=\""
            << kWidth - kMarginR + 28 << "\" y2=\"" << ly - 4 << "\" stroke=\"" << color
            << "\" stroke-width=\"2\"/>\n";
        out << "<text x=\"" << kWidth - kMarginR + 32 << "\" y=\"" << ly
            << "\" font-family=\"sans-serif\" font-size=\"11\">" << esc(s.label) << "</text>\n";
    }
    out << "</svg>\n";
}

}  // namespace softtrack
