#include "sgdlab/numerics/stats.hpp"

#include <algorithm>
#include <boost/math/distributions/chi_squared.hpp>
#include <cmath>
#include <numeric>

#include "sgdlab/errors.hpp"

namespace sgdlab {

Histogram histogram(std::span<const double> samples, std::span<const double> edges) {
    if (edges.size() < 2) throw InputError("histogram: need at least two edges");
    for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
        if (!(edges[i] < edges[i + 1])) throw InputError("histogram: edges must be strictly increasing");
    }
    Histogram h;
    h.bin_edges.assign(edges.begin(), edges.end());
    h.counts.assign(edges.size() - 1, 0);
    const double lo = edges.front();
    const double hi = edges.back();
    for (double x : samples) {
        if (!(x >= lo && x <= hi)) continue;
        auto it = std::upper_bound(edges.begin(), edges.end(), x);
        std::size_t b = static_cast<std::size_t>(it - edges.begin());
        b = b == 0 ? 0 : b - 1;
        if (b >= h.counts.size()) b = h.counts.size() - 1;  // x == hi
        ++h.counts[b];
        ++h.total;
    }
    return h;
}

Vec uniform_edges(double lo, double hi, std::size_t bins) {
    if (bins == 0 || !(lo < hi)) throw InputError("uniform_edges: need bins >= 1 and lo < hi");
    Vec edges(bins + 1);
    for (std::size_t i = 0; i <= bins; ++i) edges[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(bins);
    edges.back() = hi;
    return edges;
}

double quantile(std::span<const double> samples, double q) {
    if (samples.empty()) throw InputError("quantile: empty sample");
    Vec sorted(samples.begin(), samples.end());
    std::sort(sorted.begin(), sorted.end());
    const double pos = std::clamp(q, 0.0, 1.0) * static_cast<double>(sorted.size() - 1);
    const auto i = static_cast<std::size_t>(pos);
    const std::size_t j = std::min(i + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(i);
    return sorted[i] * (1.0 - frac) + sorted[j] * frac;
}

LogLogFit loglog_fit(std::span<const double> xs, std::span<const double> ys, std::span<const double> weights) {
    if (xs.size() != ys.size() || xs.size() != weights.size()) {
        throw DimensionError("loglog_fit: xs, ys and weights must have equal length");
    }
    Vec lx, ly, w;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (weights[i] < 0.0) throw InputError("loglog_fit: negative weight");
        if (weights[i] == 0.0) continue;
        if (!(xs[i] > 0.0) || !(ys[i] > 0.0)) throw InputError("loglog_fit: xs and ys must be positive");
        lx.push_back(std::log(xs[i]));
        ly.push_back(std::log(ys[i]));
        w.push_back(weights[i]);
    }
    if (lx.size() < 2) throw FitError("loglog_fit: fewer than two usable points");

    const double sw = std::accumulate(w.begin(), w.end(), 0.0);
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        mx += w[i] * lx[i];
        my += w[i] * ly[i];
    }
    mx /= sw;
    my /= sw;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        const double dx = lx[i] - mx;
        const double dy = ly[i] - my;
        sxx += w[i] * dx * dx;
        sxy += w[i] * dx * dy;
        syy += w[i] * dy * dy;
    }
    if (!(sxx > 0.0)) throw FitError("loglog_fit: all usable xs coincide");

    LogLogFit fit;
    fit.points = lx.size();
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    double sse = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        const double r = ly[i] - (fit.intercept + fit.slope * lx[i]);
        sse += w[i] * r * r;
    }
    fit.r2 = syy > 0.0 ? 1.0 - sse / syy : 1.0;
    if (lx.size() > 2) fit.slope_se = std::sqrt(sse / static_cast<double>(lx.size() - 2) / sxx);
    return fit;
}

LogLogFit loglog_fit(std::span<const double> xs, std::span<const double> ys) {
    const Vec ones(xs.size(), 1.0);
    return loglog_fit(xs, ys, ones);
}

MeanSe mean_se(std::span<const double> values) {
    if (values.empty()) throw InputError("mean_se: empty sample");
    const double n = static_cast<double>(values.size());
    MeanSe out;
    out.mean = pairwise_sum(values) / n;
    if (values.size() > 1) {
        Vec sq(values.size());
        for (std::size_t i = 0; i < values.size(); ++i) sq[i] = (values[i] - out.mean) * (values[i] - out.mean);
        out.se = std::sqrt(pairwise_sum(sq) / (n - 1.0) / n);
    }
    return out;
}

double ks_distance(std::span<const double> a, std::span<const double> wa, std::span<const double> b,
                   std::span<const double> wb) {
    if (a.size() != wa.size() || b.size() != wb.size()) throw DimensionError("ks_distance: weight length mismatch");
    if (a.empty() || b.empty()) throw InputError("ks_distance: empty sample");
    auto sorted_index = [](std::span<const double> x) {
        std::vector<std::size_t> idx(x.size());
        std::iota(idx.begin(), idx.end(), 0);
        std::sort(idx.begin(), idx.end(), [&](std::size_t i, std::size_t j) { return x[i] < x[j]; });
        return idx;
    };
    const auto ia = sorted_index(a);
    const auto ib = sorted_index(b);
    const double ta = pairwise_sum(wa);
    const double tb = pairwise_sum(wb);
    if (!(ta > 0.0) || !(tb > 0.0)) throw InputError("ks_distance: weights must have positive total");

    double ca = 0.0, cb = 0.0, dmax = 0.0;
    std::size_t i = 0, j = 0;
    while (i < ia.size() || j < ib.size()) {
        double x;
        if (j >= ib.size() || (i < ia.size() && a[ia[i]] <= b[ib[j]])) {
            x = a[ia[i]];
        } else {
            x = b[ib[j]];
        }
        while (i < ia.size() && a[ia[i]] == x) ca += wa[ia[i++]];
        while (j < ib.size() && b[ib[j]] == x) cb += wb[ib[j++]];
        dmax = std::max(dmax, std::abs(ca / ta - cb / tb));
    }
    return dmax;
}

ChiSquare chi_square_gof(std::span<const std::uint64_t> observed, std::span<const double> expected_prob,
                         double min_expected) {
    if (observed.size() != expected_prob.size()) throw DimensionError("chi_square_gof: length mismatch");
    const double n = static_cast<double>(std::accumulate(observed.begin(), observed.end(), std::uint64_t{0}));
    const double pmass = std::accumulate(expected_prob.begin(), expected_prob.end(), 0.0);
    if (!(n > 0.0) || !(pmass > 0.0)) throw InputError("chi_square_gof: empty observation or zero mass");

    std::vector<double> obs_cells, exp_cells;
    double o_acc = 0.0, e_acc = 0.0;
    for (std::size_t i = 0; i < observed.size(); ++i) {
        o_acc += static_cast<double>(observed[i]);
        e_acc += n * expected_prob[i] / pmass;
        if (e_acc >= min_expected) {
            obs_cells.push_back(o_acc);
            exp_cells.push_back(e_acc);
            o_acc = e_acc = 0.0;
        }
    }
    if (e_acc > 0.0 || o_acc > 0.0) {
        if (exp_cells.empty()) {
            obs_cells.push_back(o_acc);
            exp_cells.push_back(e_acc);
        } else {
            obs_cells.back() += o_acc;
            exp_cells.back() += e_acc;
        }
    }
    if (obs_cells.size() < 2) throw FitError("chi_square_gof: fewer than two cells after merging");

    ChiSquare out;
    for (std::size_t i = 0; i < obs_cells.size(); ++i) {
        const double d = obs_cells[i] - exp_cells[i];
        out.statistic += d * d / exp_cells[i];
    }
    out.dof = obs_cells.size() - 1;
    const boost::math::chi_squared dist(static_cast<double>(out.dof));
    out.p_value = boost::math::cdf(boost::math::complement(dist, out.statistic));
    return out;
}

}  // namespace sgdlab
