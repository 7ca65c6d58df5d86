#pragma once

#include <string>
#include <vector>

namespace anomaly::cli {

struct PlotSeries {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
    /// Markers only when false.
    bool line = true;
};

/// Static log-log chart; nonpositive points are skipped.
std::string loglog_svg(const std::string& title, const std::string& xlabel, const std::string& ylabel,
                       const std::vector<PlotSeries>& series);

}  // namespace anomaly::cli
