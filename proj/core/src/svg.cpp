#include "ifadit/svg.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "ifadit/error.hpp"

namespace ifadit {

namespace {

constexpr int kWidth = 640;
constexpr int kHeight = 360;
constexpr int kMargin = 48;

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            default: out += c;
        }
    }
    return out;
}

void write_file(const std::string& path, const std::string& body) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open " + path + " for writing");
    os << body;
    if (!os) throw IoError("write failed for " + path);
}

std::string header(const std::string& title) {
    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
       << kHeight << "\" viewBox=\"0 0 " << kWidth << " " << kHeight << "\">\n"
       << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
       << "<text x=\"" << kWidth / 2 << "\" y=\"24\" text-anchor=\"middle\" "
       << "font-family=\"sans-serif\" font-size=\"16\">" << escape(title) << "</text>\n";
    return os.str();
}

}  // namespace

void svg_bar_chart(const std::string& path, const std::string& title,
                   const std::vector<std::string>& labels, const std::vector<double>& values) {
    if (labels.size() != values.size())
        throw ContractError("svg_bar_chart: labels and values must align");
    std::ostringstream os;
    os << header(title);
    if (!values.empty()) {
        double lo = 0.0, hi = 0.0;
        for (double v : values) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        if (hi == lo) hi = lo + 1.0;
        const double plot_w = kWidth - 2 * kMargin;
        const double plot_h = kHeight - 2 * kMargin;
        const double slot = plot_w / static_cast<double>(values.size());
        const double zero_y = kMargin + plot_h * (hi / (hi - lo));
        os << "<line x1=\"" << kMargin << "\" y1=\"" << zero_y << "\" x2=\"" << kWidth - kMargin
           << "\" y2=\"" << zero_y << "\" stroke=\"#333\"/>\n";
        for (std::size_t i = 0; i < values.size(); ++i) {
            const double x = kMargin + slot * (static_cast<double>(i) + 0.15);
            const double h = plot_h * std::fabs(values[i]) / (hi - lo);
            const double y = values[i] >= 0.0 ? zero_y - h : zero_y;
            os << "<rect x=\"" << x << "\" y=\"" << y << "\" width=\"" << slot * 0.7
               << "\" height=\"" << h << "\" fill=\"#4878a8\"/>\n";
            os << "<text x=\"" << x + slot * 0.35 << "\" y=\"" << kHeight - kMargin / 2.0
               << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">"
               << escape(labels[i]) << "</text>\n";
            os << "<text x=\"" << x + slot * 0.35 << "\" y=\"" << y - 4
               << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"10\">"
               << values[i] << "</text>\n";
        }
    }
    os << "</svg>\n";
    write_file(path, os.str());
}

void svg_line_chart(const std::string& path, const std::string& title,
                    const std::vector<double>& values) {
    std::ostringstream os;
    os << header(title);
    if (values.size() >= 2) {
        double lo = values[0], hi = values[0];
        for (double v : values) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        if (hi == lo) hi = lo + 1.0;
        const double plot_w = kWidth - 2 * kMargin;
        const double plot_h = kHeight - 2 * kMargin;
        os << "<polyline fill=\"none\" stroke=\"#4878a8\" stroke-width=\"1.5\" points=\"";
        for (std::size_t i = 0; i < values.size(); ++i) {
            const double x = kMargin + plot_w * static_cast<double>(i) /
                                           static_cast<double>(values.size() - 1);
            const double y = kMargin + plot_h * (hi - values[i]) / (hi - lo);
            os << x << "," << y << " ";
        }
        os << "\"/>\n";
        os << "<text x=\"" << kMargin << "\" y=\"" << kMargin - 8
           << "\" font-family=\"sans-serif\" font-size=\"10\">max " << hi << "</text>\n";
        os << "<text x=\"" << kMargin << "\" y=\"" << kHeight - kMargin / 2.0
           << "\" font-family=\"sans-serif\" font-size=\"10\">min " << lo << "</text>\n";
    }
    os << "</svg>\n";
    write_file(path, os.str());
}

}  // namespace ifadit
