#include "sgdlab/cli/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "sgdlab/errors.hpp"

namespace sgdlab::cli {

namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 420.0;
constexpr double kLeft = 72.0;
constexpr double kRight = 24.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 56.0;
constexpr const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

std::string fmt(double v, const char* pattern = "%.2f") {
    char buf[64];
    std::snprintf(buf, sizeof(buf), pattern, v);
    return buf;
}

std::string escape_xml(std::string_view s) {
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

struct Axis {
    double lo = 0.0, hi = 1.0;
    bool log = false;

    double value(double v) const { return log ? std::log10(v) : v; }
    void include(double v) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    void finalize() {
        if (!(hi > lo)) {
            const double pad = lo == 0.0 ? 1.0 : 0.5 * std::abs(lo);
            lo -= pad;
            hi += pad;
        }
        const double pad = 0.04 * (hi - lo);
        lo -= pad;
        hi += pad;
    }
    std::vector<double> ticks() const {
        std::vector<double> t;
        if (log) {
            for (double d = std::ceil(lo); d <= hi; d += 1.0) t.push_back(d);
            if (t.size() >= 2) return t;
            t.clear();
        }
        const double raw = (hi - lo) / 5.0;
        const double mag = std::pow(10.0, std::floor(std::log10(raw)));
        double step = mag;
        for (double m : {1.0, 2.0, 5.0, 10.0}) {
            if (m * mag >= raw) {
                step = m * mag;
                break;
            }
        }
        for (double v = std::ceil(lo / step) * step; v <= hi + 1e-12 * step; v += step) t.push_back(v);
        return t;
    }
    std::string label(double tick) const {
        if (log) return fmt(std::pow(10.0, tick), "%.3g");
        return fmt(std::abs(tick) < 1e-12 ? 0.0 : tick, "%.3g");
    }
};

}  // namespace

std::string render_svg(const PlotSpec& spec) {
    const bool loglog = spec.kind == PlotKind::loglog_scatter;
    Axis ax, ay;
    ax.log = ay.log = loglog;
    ax.lo = ay.lo = std::numeric_limits<double>::infinity();
    ax.hi = ay.hi = -std::numeric_limits<double>::infinity();

    std::vector<std::vector<std::pair<double, double>>> points(spec.series.size());
    std::size_t total = 0;
    for (std::size_t s = 0; s < spec.series.size(); ++s) {
        const Series& ser = spec.series[s];
        if (ser.x.size() != ser.y.size()) throw DimensionError("plot: series x and y lengths differ");
        for (std::size_t i = 0; i < ser.x.size(); ++i) {
            const double x = ser.x[i], y = ser.y[i];
            if (!std::isfinite(x) || !std::isfinite(y)) continue;
            if (loglog && (x <= 0.0 || y <= 0.0)) continue;
            points[s].emplace_back(ax.value(x), ay.value(y));
            ax.include(ax.value(x));
            ay.include(ay.value(y));
            ++total;
        }
    }
    if (total == 0) throw InputError("plot: empty series");

    double bar_width = 0.0;
    if (spec.kind == PlotKind::histogram) {
        for (const auto& pts : points) {
            for (std::size_t i = 1; i < pts.size(); ++i) {
                const double d = pts[i].first - pts[i - 1].first;
                if (d > 0.0 && (bar_width == 0.0 || d < bar_width)) bar_width = d;
            }
        }
        if (bar_width == 0.0) bar_width = 1.0;
        ax.include(ax.lo - 0.5 * bar_width);
        ax.include(ax.hi + 0.5 * bar_width);
        ay.include(0.0);
    }
    ax.finalize();
    ay.finalize();

    const double pw = kWidth - kLeft - kRight;
    const double ph = kHeight - kTop - kBottom;
    auto px = [&](double v) { return kLeft + (v - ax.lo) / (ax.hi - ax.lo) * pw; };
    auto py = [&](double v) { return kTop + (ay.hi - v) / (ay.hi - ay.lo) * ph; };

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt(kWidth, "%.0f") << "\" height=\""
        << fmt(kHeight, "%.0f") << "\" viewBox=\"0 0 " << fmt(kWidth, "%.0f") << ' ' << fmt(kHeight, "%.0f")
        << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    svg << "<rect x=\"0\" y=\"0\" width=\"" << fmt(kWidth, "%.0f") << "\" height=\"" << fmt(kHeight, "%.0f")
        << "\" fill=\"white\"/>\n";
    svg << "<text x=\"" << fmt(kWidth / 2) << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">"
        << escape_xml(spec.title) << "</text>\n";

    // Axes box and ticks.
    svg << "<path d=\"M" << fmt(kLeft) << ' ' << fmt(kTop) << " V" << fmt(kTop + ph) << " H" << fmt(kLeft + pw)
        << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (double t : ax.ticks()) {
        const double x = px(t);
        svg << "<path d=\"M" << fmt(x) << ' ' << fmt(kTop + ph) << " v5\" stroke=\"black\"/>"
            << "<text x=\"" << fmt(x) << "\" y=\"" << fmt(kTop + ph + 18) << "\" text-anchor=\"middle\">"
            << ax.label(t) << "</text>\n";
    }
    for (double t : ay.ticks()) {
        const double y = py(t);
        svg << "<path d=\"M" << fmt(kLeft) << ' ' << fmt(y) << " h-5\" stroke=\"black\"/>"
            << "<text x=\"" << fmt(kLeft - 8) << "\" y=\"" << fmt(y + 4) << "\" text-anchor=\"end\">" << ay.label(t)
            << "</text>\n";
    }
    svg << "<text x=\"" << fmt(kLeft + pw / 2) << "\" y=\"" << fmt(kHeight - 12) << "\" text-anchor=\"middle\">"
        << escape_xml(spec.x_label) << "</text>\n";
    svg << "<text x=\"16\" y=\"" << fmt(kTop + ph / 2) << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
        << fmt(kTop + ph / 2) << ")\">" << escape_xml(spec.y_label) << "</text>\n";

    for (std::size_t s = 0; s < points.size(); ++s) {
        const char* color = kColors[s % std::size(kColors)];
        const auto& pts = points[s];
        if (pts.empty()) continue;
        switch (spec.kind) {
            case PlotKind::loglog_scatter:
                for (const auto& [x, y] : pts) {
                    svg << "<circle cx=\"" << fmt(px(x)) << "\" cy=\"" << fmt(py(y)) << "\" r=\"3\" fill=\"" << color
                        << "\"/>\n";
                }
                break;
            case PlotKind::histogram:
                for (const auto& [x, y] : pts) {
                    const double x0 = px(x - 0.5 * bar_width), x1 = px(x + 0.5 * bar_width);
                    const double y0 = py(std::max(0.0, y)), y1 = py(0.0);
                    svg << "<rect x=\"" << fmt(x0) << "\" y=\"" << fmt(y0) << "\" width=\"" << fmt(x1 - x0)
                        << "\" height=\"" << fmt(y1 - y0) << "\" fill=\"" << color << "\" fill-opacity=\"0.45\"/>\n";
                }
                break;
            case PlotKind::line: {
                svg << "<path d=\"";
                for (std::size_t i = 0; i < pts.size(); ++i) {
                    svg << (i == 0 ? "M" : " L") << fmt(px(pts[i].first)) << ' ' << fmt(py(pts[i].second));
                }
                svg << "\" fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\"/>\n";
                break;
            }
        }
    }

    if (spec.reference) {
        const auto& ref = *spec.reference;
        // In log space the guide is log10 y = slope log10 x + intercept / ln 10.
        const double b = loglog ? ref.intercept / std::log(10.0) : ref.intercept;
        const double x0 = ax.lo, x1 = ax.hi;
        svg << "<path d=\"M" << fmt(px(x0)) << ' ' << fmt(py(b + ref.slope * x0)) << " L" << fmt(px(x1)) << ' '
            << fmt(py(b + ref.slope * x1)) << "\" stroke=\"black\" stroke-dasharray=\"6 4\" fill=\"none\" clip-path=\"url(#plot)\"/>\n";
    }
    svg << "<defs><clipPath id=\"plot\"><rect x=\"" << fmt(kLeft) << "\" y=\"" << fmt(kTop) << "\" width=\""
        << fmt(pw) << "\" height=\"" << fmt(ph) << "\"/></clipPath></defs>\n";

    double ly = kTop + 14;
    for (std::size_t s = 0; s < spec.series.size(); ++s) {
        if (spec.series[s].label.empty()) continue;
        svg << "<text x=\"" << fmt(kLeft + pw - 8) << "\" y=\"" << fmt(ly) << "\" text-anchor=\"end\" fill=\""
            << kColors[s % std::size(kColors)] << "\">" << escape_xml(spec.series[s].label) << "</text>\n";
        ly += 16;
    }
    if (spec.reference && !spec.reference->label.empty()) {
        svg << "<text x=\"" << fmt(kLeft + pw - 8) << "\" y=\"" << fmt(ly) << "\" text-anchor=\"end\">"
            << escape_xml(spec.reference->label) << "</text>\n";
    }
    svg << "</svg>\n";
    return svg.str();
}

void plot(const PlotSpec& spec, const std::string& out_path) {
    const std::string text = render_svg(spec);
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw InputError("plot: cannot write " + out_path);
    out << text;
}

}  // namespace sgdlab::cli
