#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sgdlab/numerics/linalg.hpp"

namespace sgdlab::cli {

enum class PlotKind { loglog_scatter, histogram, line };

struct Series {
    std::string label;
    Vec x;
    Vec y;
};

/// Dashed guide y = exp(intercept) x^slope on log-log axes, y = intercept +
/// slope x otherwise.
struct ReferenceLine {
    double slope = 1.0;
    double intercept = 0.0;
    std::string label;
};

struct PlotSpec {
    PlotKind kind = PlotKind::line;
    std::string title;
    std::string x_label;
    std::string y_label;
    std::vector<Series> series;
    std::optional<ReferenceLine> reference;
};

/// Standalone SVG (paths, circles, rects and text only). Histogram series
/// take x as bin centers with uniform width. Throws InputError when there
/// is nothing to draw; log-log plots drop nonpositive points.
std::string render_svg(const PlotSpec& spec);
void plot(const PlotSpec& spec, const std::string& out_path);

}  // namespace sgdlab::cli
