#include "cpschwarz/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "cpschwarz/errors.hpp"

namespace cps {

namespace {

constexpr double kWidth = 760, kHeight = 520;
constexpr double kLeft = 72, kRight = 16, kTop = 40, kBottom = 52;

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};

std::string esc(const std::string& s) {
    std::string r;
    for (char ch : s) {
        switch (ch) {
            case '&': r += "&amp;"; break;
            case '<': r += "&lt;"; break;
            case '>': r += "&gt;"; break;
            default: r += ch;
        }
    }
    return r;
}

std::string fmt(double v, const char* spec = "%.2f") {
    char buf[48];
    std::snprintf(buf, sizeof buf, spec, v);
    return buf;
}

}  // namespace

void LinePlot::add(PlotSeries series) {
    if (series.x.size() != series.y.size())
        throw DimensionMismatch("plot series: x and y lengths differ");
    if (series.color.empty())
        series.color = kPalette[series_.size() % (sizeof kPalette / sizeof *kPalette)];
    series_.push_back(std::move(series));
}

LinePlot::LinePlot(std::string title, std::string xlabel, std::string ylabel)
    : title_(std::move(title)), xlabel_(std::move(xlabel)), ylabel_(std::move(ylabel)) {}

void LinePlot::write(const std::filesystem::path& path) const {
    double xmin = std::numeric_limits<double>::max(), xmax = -xmin;
    double ymin = std::numeric_limits<double>::max(), ymax = -ymin;
    for (const auto& s : series_) {
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            double x = s.x[i], y = s.y[i];
            if (!std::isfinite(x) || !std::isfinite(y)) continue;
            if (log_y_ && !(y > 0.0)) continue;
            xmin = std::min(xmin, x);
            xmax = std::max(xmax, x);
            double yv = log_y_ ? std::log10(y) : y;
            ymin = std::min(ymin, yv);
            ymax = std::max(ymax, yv);
        }
    }
    if (xmin > xmax) { xmin = 0; xmax = 1; ymin = 0; ymax = 1; }
    if (xmax - xmin < 1e-300) { xmin -= 0.5; xmax += 0.5; }
    if (ymax - ymin < 1e-300) { ymin -= 0.5; ymax += 0.5; }

    const double pw = kWidth - kLeft - kRight, ph = kHeight - kTop - kBottom;
    auto px = [&](double x) { return kLeft + (x - xmin) / (xmax - xmin) * pw; };
    auto py = [&](double yv) { return kTop + ph - (yv - ymin) / (ymax - ymin) * ph; };

    std::ofstream out(path);
    if (!out) throw ConfigError("svg: cannot open '" + path.string() + "' for writing");
    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << kWidth
        << "\" height=\"" << kHeight << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight
        << "\">\n"
        << "<rect width=\"" << kWidth << "\" height=\"" << kHeight << "\" fill=\"white\"/>\n";

    out << "<text x=\"" << kWidth / 2 << "\" y=\"24\" text-anchor=\"middle\" "
        << "font-family=\"sans-serif\" font-size=\"15\">" << esc(title_) << "</text>\n";

    // ticks
    out << "<g font-family=\"sans-serif\" font-size=\"11\" fill=\"#333\">\n";
    {
        double range = xmax - xmin;
        double step = std::pow(10.0, std::floor(std::log10(range / 5.0)));
        for (double mult : {5.0, 2.0, 1.0})
            if (range / (step * mult) >= 4.0) { step *= mult; break; }
        for (double x = std::ceil(xmin / step) * step; x <= xmax + 1e-9 * range; x += step) {
            double X = px(x);
            out << "<line x1=\"" << fmt(X) << "\" y1=\"" << kTop + ph << "\" x2=\"" << fmt(X)
                << "\" y2=\"" << kTop + ph + 5 << "\" stroke=\"#333\"/>\n";
            out << "<line x1=\"" << fmt(X) << "\" y1=\"" << kTop << "\" x2=\"" << fmt(X)
                << "\" y2=\"" << kTop + ph << "\" stroke=\"#ddd\"/>\n";
            out << "<text x=\"" << fmt(X) << "\" y=\"" << kTop + ph + 18
                << "\" text-anchor=\"middle\">" << fmt(x, "%.6g") << "</text>\n";
        }
    }
    if (log_y_) {
        int d0 = static_cast<int>(std::ceil(ymin - 1e-9));
        int d1 = static_cast<int>(std::floor(ymax + 1e-9));
        int stride = std::max(1, (d1 - d0) / 10 + ((d1 - d0) % 10 ? 1 : 0));
        for (int d = d0; d <= d1; d += stride) {
            double Y = py(d);
            out << "<line x1=\"" << kLeft - 5 << "\" y1=\"" << fmt(Y) << "\" x2=\"" << kLeft
                << "\" y2=\"" << fmt(Y) << "\" stroke=\"#333\"/>\n";
            out << "<line x1=\"" << kLeft << "\" y1=\"" << fmt(Y) << "\" x2=\"" << kLeft + pw
                << "\" y2=\"" << fmt(Y) << "\" stroke=\"#ddd\"/>\n";
            out << "<text x=\"" << kLeft - 8 << "\" y=\"" << fmt(Y + 4)
                << "\" text-anchor=\"end\">" << fmt(std::pow(10.0, d), "%.0e") << "</text>\n";
        }
    } else {
        double range = ymax - ymin;
        double step = std::pow(10.0, std::floor(std::log10(range / 5.0)));
        for (double mult : {5.0, 2.0, 1.0})
            if (range / (step * mult) >= 4.0) { step *= mult; break; }
        for (double y = std::ceil(ymin / step) * step; y <= ymax + 1e-9 * range; y += step) {
            double Y = py(y);
            out << "<line x1=\"" << kLeft - 5 << "\" y1=\"" << fmt(Y) << "\" x2=\"" << kLeft
                << "\" y2=\"" << fmt(Y) << "\" stroke=\"#333\"/>\n";
            out << "<line x1=\"" << kLeft << "\" y1=\"" << fmt(Y) << "\" x2=\"" << kLeft + pw
                << "\" y2=\"" << fmt(Y) << "\" stroke=\"#ddd\"/>\n";
            out << "<text x=\"" << kLeft - 8 << "\" y=\"" << fmt(Y + 4)
                << "\" text-anchor=\"end\">" << fmt(y, "%.6g") << "</text>\n";
        }
    }
    out << "</g>\n";

    out << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << pw << "\" height=\""
        << ph << "\" fill=\"none\" stroke=\"#333\"/>\n";

    for (const auto& s : series_) {
        out << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.6\"";
        if (s.dashed) out << " stroke-dasharray=\"6,4\"";
        out << " points=\"";
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            double y = s.y[i];
            if (!std::isfinite(s.x[i]) || !std::isfinite(y)) continue;
            if (log_y_ && !(y > 0.0)) continue;
            out << fmt(px(s.x[i])) << ',' << fmt(py(log_y_ ? std::log10(y) : y)) << ' ';
        }
        out << "\"/>\n";
        if (s.markers) {
            for (std::size_t i = 0; i < s.x.size(); ++i) {
                double y = s.y[i];
                if (!std::isfinite(s.x[i]) || !std::isfinite(y)) continue;
                if (log_y_ && !(y > 0.0)) continue;
                out << "<circle cx=\"" << fmt(px(s.x[i])) << "\" cy=\""
                    << fmt(py(log_y_ ? std::log10(y) : y)) << "\" r=\"2.5\" fill=\"" << s.color
                    << "\"/>\n";
            }
        }
    }

    // axis labels
    out << "<text x=\"" << kLeft + pw / 2 << "\" y=\"" << kHeight - 12
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">"
        << esc(xlabel_) << "</text>\n";
    out << "<text x=\"18\" y=\"" << kTop + ph / 2
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" "
        << "transform=\"rotate(-90 18 " << kTop + ph / 2 << ")\">" << esc(ylabel_)
        << "</text>\n";

    // legend
    if (!series_.empty()) {
        double lx = kLeft + pw - 190, ly = kTop + 12;
        out << "<g font-family=\"sans-serif\" font-size=\"12\">\n";
        for (std::size_t i = 0; i < series_.size(); ++i) {
            double y = ly + 17.0 * i;
            out << "<line x1=\"" << lx << "\" y1=\"" << fmt(y) << "\" x2=\"" << lx + 26
                << "\" y2=\"" << fmt(y) << "\" stroke=\"" << series_[i].color
                << "\" stroke-width=\"1.6\""
                << (series_[i].dashed ? " stroke-dasharray=\"6,4\"" : "") << "/>\n";
            out << "<text x=\"" << lx + 32 << "\" y=\"" << fmt(y + 4) << "\">"
                << esc(series_[i].label) << "</text>\n";
        }
        out << "</g>\n";
    }

    out << "</svg>\n";
    if (!out) throw ConfigError("svg: write to '" + path.string() + "' failed");
}

}  // namespace cps
