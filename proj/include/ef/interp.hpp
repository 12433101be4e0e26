#pragma once

#include <array>
#include <vector>

#include "ef/field.hpp"

namespace ef {

/// Smooth off-node evaluation of a scalar field.
///
/// Values come from Catmull-Rom bicubic interpolation in computational
/// coordinates. Polar grids extend below the origin by the reflection rule
/// f(-r, theta) = f(r, theta + pi) and replace the interpolant near the
/// coordinate singularity (r < 2 dr) by a least-squares quartic patch in
/// the computational Cartesian frame, blended smoothly into the bicubic.
///
/// Coordinate frames:
///  - comp  : (theta, r) for polar kinds, (x, y) otherwise;
///  - c     : "computational Cartesian" = r e^{i theta} as a plane point for
///            polar kinds, identical to comp otherwise. Orbits integrate in
///            this frame;
///  - phys  : physical plane, reached through the conformal map on ovals.
class FieldSampler {
public:
    explicit FieldSampler(const ScalarField2D& f);

    GridPtr grid() const { return grid_; }

    double value_comp(Vec2 comp) const;
    /// Gradient in the computational Cartesian frame at a comp point.
    Vec2 grad_comp(Vec2 comp) const;

    double value_c(Vec2 c) const;
    Vec2 grad_c(Vec2 c) const;
    /// Symmetric Hessian (fxx, fxy, fyy) in the computational Cartesian
    /// frame: analytic from the origin patch, finite differences of the
    /// interpolated gradient elsewhere.
    std::array<double, 3> hess_c(Vec2 c) const;

    double value_phys(Vec2 p) const;
    Vec2 grad_phys(Vec2 p) const;

    /// Conformal factor |f'(z)|^2 at a computational Cartesian point.
    double conformal_c(Vec2 c) const;

private:
    double node(int j, int i) const;
    void weights_1d(double t, std::array<double, 4>& w, std::array<double, 4>& dw) const;
    void gather(Vec2 comp, double& val, double& d_col, double& d_row) const;
    void build_patch();
    double patch_value(Vec2 c) const;
    Vec2 patch_grad(Vec2 c) const;
    std::array<double, 3> patch_hess(Vec2 c) const;
    bool polar() const {
        return kind_ == GridKind::DiskPolar || kind_ == GridKind::OvalMapped;
    }

    GridPtr grid_;
    GridKind kind_;
    std::vector<double> data_;
    std::array<double, 15> patch_{}; // quartic coefficients, scaled frame
    double patch_scale_ = 1.0;
};

} // namespace ef
