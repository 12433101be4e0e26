#pragma once

#include <vector>

#include "ef/grid.hpp"

namespace ef {

/// Grid-sampled real scalar (stream function, vorticity, forcing, ...).
/// On polar grids the origin row must be constant; helpers that build
/// fields enforce that by construction.
class ScalarField2D {
public:
    ScalarField2D() = default;
    explicit ScalarField2D(GridPtr grid, double fill = 0.0)
        : grid_(std::move(grid)), v_(grid_->size(), fill) {}

    const GridPtr& grid() const { return grid_; }
    std::size_t size() const { return v_.size(); }

    double& operator[](std::size_t k) { return v_[k]; }
    double operator[](std::size_t k) const { return v_[k]; }
    double& at(int j, int i) { return v_[grid_->index(j, i)]; }
    double at(int j, int i) const { return v_[grid_->index(j, i)]; }

    double* data() { return v_.data(); }
    const double* data() const { return v_.data(); }

    /// max |f| over nodes at least `collar` cells from the boundary.
    double linf(int collar = 0) const;
    /// Physical (area-weighted) L2 norm over nodes at least `collar` cells
    /// from the boundary.
    double l2(int collar = 0) const;
    /// Physical inner product <f, g> (same collar rule).
    double inner(const ScalarField2D& g, int collar = 0) const;

    ScalarField2D& operator+=(const ScalarField2D& o);
    ScalarField2D& operator-=(const ScalarField2D& o);
    ScalarField2D& operator*=(double s);

    friend ScalarField2D operator+(ScalarField2D a, const ScalarField2D& b) { return a += b; }
    friend ScalarField2D operator-(ScalarField2D a, const ScalarField2D& b) { return a -= b; }
    friend ScalarField2D operator*(double s, ScalarField2D a) { return a *= s; }

private:
    GridPtr grid_;
    std::vector<double> v_;
};

/// Two real components per node, stored in physical (x, y) frame.
class VectorField2D {
public:
    VectorField2D() = default;
    explicit VectorField2D(GridPtr grid)
        : grid_(std::move(grid)), vx_(grid_->size(), 0.0), vy_(grid_->size(), 0.0) {}

    const GridPtr& grid() const { return grid_; }
    std::size_t size() const { return vx_.size(); }

    double& x(std::size_t k) { return vx_[k]; }
    double x(std::size_t k) const { return vx_[k]; }
    double& y(std::size_t k) { return vy_[k]; }
    double y(std::size_t k) const { return vy_[k]; }
    Vec2 at(std::size_t k) const { return {vx_[k], vy_[k]}; }
    void set(std::size_t k, Vec2 v) {
        vx_[k] = v.x;
        vy_[k] = v.y;
    }

    double max_norm() const;

private:
    GridPtr grid_;
    std::vector<double> vx_, vy_;
};

/// Builds a field by evaluating `fn(x, y)` at physical node positions. On
/// polar grids the origin row is written from a single evaluation so the
/// row-constant invariant holds exactly.
template <class F>
ScalarField2D sample(const GridPtr& grid, F&& fn) {
    ScalarField2D out(grid);
    const std::size_t n = grid->size();
    for (std::size_t k = 0; k < n; ++k) {
        const Vec2 p = grid->pos(k);
        out[k] = fn(p.x, p.y);
    }
    if (grid->kind() == GridKind::DiskPolar || grid->kind() == GridKind::OvalMapped) {
        const double v0 = out[grid->index(0, 0)];
        for (int i = 0; i < grid->nx(); ++i) out[grid->index(0, i)] = v0;
    }
    return out;
}

void check_same_grid(const ScalarField2D& a, const ScalarField2D& b, const char* who);

} // namespace ef
