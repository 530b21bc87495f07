#include "sgdlab/models/potentials.hpp"

#include <cmath>

#include "sgdlab/errors.hpp"

namespace sgdlab {

const CriticalPoint& AnalyticPotential::first(CriticalKind kind) const {
    for (const auto& cp : catalog_) {
        if (cp.kind == kind) return cp;
    }
    throw InputError("potential has no catalogued point of the requested kind");
}

double offset_for_ratio(double a, double w, double c) {
    if (!(c > 1.0)) throw InputError("offset_for_ratio: c must exceed 1");
    return a * std::pow(w, 4) / (c - 1.0);
}

// --- DoubleWell ------------------------------------------------------------

DoubleWell::DoubleWell(double a, double w, double offset) : AnalyticPotential(offset), a_(a), w_(w) {
    if (!(a > 0.0) || !(w > 0.0) || !(offset > 0.0)) throw InputError("double_well: a, w and L0 must be positive");
    const double h_min = 8.0 * a * w * w;
    const double h_saddle = -4.0 * a * w * w;
    const Vec hm{h_min};
    const Vec hs{h_saddle};
    catalog_.push_back({CriticalKind::minimum, {w}, offset, SymMatrix::diagonal(hm)});
    catalog_.push_back({CriticalKind::minimum, {-w}, offset, SymMatrix::diagonal(hm)});
    catalog_.push_back({CriticalKind::saddle, {0.0}, offset + a * std::pow(w, 4), SymMatrix::diagonal(hs)});
}

double DoubleWell::loss(std::span<const double> theta) const {
    const double u = theta[0] * theta[0] - w_ * w_;
    return offset_ + a_ * u * u;
}

void DoubleWell::grad(std::span<const double> theta, std::span<double> out) const {
    out[0] = 4.0 * a_ * theta[0] * (theta[0] * theta[0] - w_ * w_);
}

std::optional<SymMatrix> DoubleWell::hessian(std::span<const double> theta) const {
    const Vec h{a_ * (12.0 * theta[0] * theta[0] - 4.0 * w_ * w_)};
    return SymMatrix::diagonal(h);
}

// --- QuadraticWell -----------------------------------------------------------

QuadraticWell::QuadraticWell(Vec curvatures, double offset) : AnalyticPotential(offset), h_(std::move(curvatures)) {
    if (h_.empty()) throw InputError("nd_quadratic_well: need at least one curvature");
    for (double h : h_) {
        if (!(h > 0.0)) throw InputError("nd_quadratic_well: curvatures must be positive");
    }
    if (!(offset > 0.0)) throw InputError("nd_quadratic_well: L0 must be positive");
    catalog_.push_back({CriticalKind::minimum, Vec(h_.size(), 0.0), offset, SymMatrix::diagonal(h_)});
}

double QuadraticWell::loss(std::span<const double> theta) const {
    double s = 0.0;
    for (std::size_t i = 0; i < h_.size(); ++i) s += h_[i] * theta[i] * theta[i];
    return offset_ + 0.5 * s;
}

void QuadraticWell::grad(std::span<const double> theta, std::span<double> out) const {
    for (std::size_t i = 0; i < h_.size(); ++i) out[i] = h_[i] * theta[i];
}

std::optional<SymMatrix> QuadraticWell::hessian(std::span<const double>) const { return SymMatrix::diagonal(h_); }

// --- SeparableDoubleWell -----------------------------------------------------

SeparableDoubleWell::SeparableDoubleWell(std::size_t dim, std::size_t axis, double a, double w, double offset,
                                         Vec transverse)
    : AnalyticPotential(offset), dim_(dim), axis_(axis), a_(a), w_(w), curv_(dim, 0.0) {
    if (dim == 0 || axis >= dim) throw InputError("nd_double_well: axis out of range");
    if (transverse.size() + 1 != dim) throw DimensionError("nd_double_well: need dim - 1 transverse curvatures");
    if (!(a > 0.0) || !(w > 0.0) || !(offset > 0.0)) throw InputError("nd_double_well: a, w and L0 must be positive");
    for (std::size_t i = 0, t = 0; i < dim; ++i) {
        if (i == axis) continue;
        if (!(transverse[t] > 0.0)) throw InputError("nd_double_well: transverse curvatures must be positive");
        curv_[i] = transverse[t++];
    }
    Vec h_min = curv_;
    Vec h_saddle = curv_;
    h_min[axis] = 8.0 * a * w * w;
    h_saddle[axis] = -4.0 * a * w * w;
    Vec at_plus(dim, 0.0), at_minus(dim, 0.0);
    at_plus[axis] = w;
    at_minus[axis] = -w;
    catalog_.push_back({CriticalKind::minimum, at_plus, offset, SymMatrix::diagonal(h_min)});
    catalog_.push_back({CriticalKind::minimum, at_minus, offset, SymMatrix::diagonal(h_min)});
    catalog_.push_back({CriticalKind::saddle, Vec(dim, 0.0), offset + a * std::pow(w, 4), SymMatrix::diagonal(h_saddle)});
}

double SeparableDoubleWell::loss(std::span<const double> theta) const {
    double s = 0.0;
    for (std::size_t i = 0; i < dim_; ++i) {
        if (i == axis_) {
            const double u = theta[i] * theta[i] - w_ * w_;
            s += a_ * u * u;
        } else {
            s += 0.5 * curv_[i] * theta[i] * theta[i];
        }
    }
    return offset_ + s;
}

void SeparableDoubleWell::grad(std::span<const double> theta, std::span<double> out) const {
    for (std::size_t i = 0; i < dim_; ++i) {
        out[i] = i == axis_ ? 4.0 * a_ * theta[i] * (theta[i] * theta[i] - w_ * w_) : curv_[i] * theta[i];
    }
}

std::optional<SymMatrix> SeparableDoubleWell::hessian(std::span<const double> theta) const {
    Vec h = curv_;
    h[axis_] = a_ * (12.0 * theta[axis_] * theta[axis_] - 4.0 * w_ * w_);
    return SymMatrix::diagonal(h);
}

std::shared_ptr<DoubleWell> double_well(double a, double w, double offset) {
    return std::make_shared<DoubleWell>(a, w, offset);
}

std::shared_ptr<QuadraticWell> nd_quadratic_well(Vec curvatures, double offset) {
    return std::make_shared<QuadraticWell>(std::move(curvatures), offset);
}

std::shared_ptr<SeparableDoubleWell> nd_double_well(std::size_t dim, std::size_t axis, double a, double w,
                                                    double offset, Vec transverse) {
    return std::make_shared<SeparableDoubleWell>(dim, axis, a, w, offset, std::move(transverse));
}

}  // namespace sgdlab
