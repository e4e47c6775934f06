#pragma once

#include <string>
#include <vector>

namespace ifadit {

// Minimal SVG chart emission for report files; no external plotting
// dependency.
void svg_bar_chart(const std::string& path, const std::string& title,
                   const std::vector<std::string>& labels, const std::vector<double>& values);

void svg_line_chart(const std::string& path, const std::string& title,
                    const std::vector<double>& values);

}  // namespace ifadit
