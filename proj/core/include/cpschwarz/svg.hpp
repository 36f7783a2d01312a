#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace cps {

struct PlotSeries {
    std::string label;
    std::vector<double> x, y;
    std::string color;  ///< empty picks from the default palette
    bool dashed = false;
    bool markers = false;
};

/// Minimal self-contained SVG 1.1 line plot: axes, ticks, optional log y
/// scale, legend.  No external resources are referenced.
class LinePlot {
public:
    LinePlot(std::string title, std::string xlabel, std::string ylabel);

    void log_y(bool on) { log_y_ = on; }
    void add(PlotSeries series);

    void write(const std::filesystem::path& path) const;

private:
    std::string title_, xlabel_, ylabel_;
    bool log_y_ = false;
    std::vector<PlotSeries> series_;
};

}  // namespace cps
