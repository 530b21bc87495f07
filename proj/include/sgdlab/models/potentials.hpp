#pragma once

#include <memory>
#include <string>
#include <vector>

#include "sgdlab/models/loss_model.hpp"

namespace sgdlab {

enum class CriticalKind { minimum, saddle };

struct CriticalPoint {
    CriticalKind kind;
    Vec location;
    double loss;
    SymMatrix hessian;
};

/// Closed-form landscape with a catalog of its critical points. Every
/// potential here carries an offset L0 > 0 so that log L is defined
/// everywhere.
class AnalyticPotential : public Objective {
public:
    const std::vector<CriticalPoint>& catalog() const { return catalog_; }
    const CriticalPoint& first(CriticalKind kind) const;
    double offset() const { return offset_; }

protected:
    explicit AnalyticPotential(double offset) : offset_(offset) {}
    std::vector<CriticalPoint> catalog_;
    double offset_;
};

/// L(theta) = L0 + a (theta^2 - w^2)^2 on R^1.
class DoubleWell final : public AnalyticPotential {
public:
    DoubleWell(double a, double w, double offset);

    std::size_t dim() const override { return 1; }
    double loss(std::span<const double> theta) const override;
    void grad(std::span<const double> theta, std::span<double> out) const override;
    using Objective::grad;
    std::optional<SymMatrix> hessian(std::span<const double> theta) const override;

    double a() const { return a_; }
    double w() const { return w_; }

private:
    double a_, w_;
};

/// L(theta) = L0 + (1/2) sum_i h_i theta_i^2.
class QuadraticWell final : public AnalyticPotential {
public:
    QuadraticWell(Vec curvatures, double offset);

    std::size_t dim() const override { return h_.size(); }
    double loss(std::span<const double> theta) const override;
    void grad(std::span<const double> theta, std::span<double> out) const override;
    using Objective::grad;
    std::optional<SymMatrix> hessian(std::span<const double> theta) const override;

private:
    Vec h_;
};

/// Separable landscape: a double well a (theta_e^2 - w^2)^2 along coordinate
/// `axis`, quadratic (1/2) h_i theta_i^2 along every other coordinate.
/// `transverse` lists h_i for the remaining coordinates in index order.
class SeparableDoubleWell final : public AnalyticPotential {
public:
    SeparableDoubleWell(std::size_t dim, std::size_t axis, double a, double w, double offset, Vec transverse);

    std::size_t dim() const override { return dim_; }
    double loss(std::span<const double> theta) const override;
    void grad(std::span<const double> theta, std::span<double> out) const override;
    using Objective::grad;
    std::optional<SymMatrix> hessian(std::span<const double> theta) const override;

    std::size_t axis() const { return axis_; }
    double w() const { return w_; }

private:
    std::size_t dim_, axis_;
    double a_, w_;
    Vec curv_;  // per coordinate; unused at `axis`
};

/// The offset L0 that makes L(saddle) / L(minimum) equal c for a double well
/// of barrier a w^4: L0 = a w^4 / (c - 1).
double offset_for_ratio(double a, double w, double c);

std::shared_ptr<DoubleWell> double_well(double a, double w, double offset);
std::shared_ptr<QuadraticWell> nd_quadratic_well(Vec curvatures, double offset);
std::shared_ptr<SeparableDoubleWell> nd_double_well(std::size_t dim, std::size_t axis, double a, double w,
                                                    double offset, Vec transverse);

}  // namespace sgdlab
