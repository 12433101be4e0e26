#pragma once

#include <vector>

#include "ef/field.hpp"

namespace ef {

/// Closed-form stream function with unit vorticity and zero boundary trace
/// on the oval domain of the grid's conformal map:
///   psi(w) = y^2/2 + Re(w^2)/4 - Re sqrt(1 + 4 q w^2) / (4 (1 - q^2)),
/// numerically re-normalized so the mean boundary-node value is exactly
/// subtracted. At q = 0 this is (x^2 + y^2 - 1)/4 on the unit disk.
ScalarField2D oval_base_stream(const GridPtr& grid);

/// Pointwise evaluation of the same closed form (without the grid-dependent
/// boundary re-normalization, whose magnitude is rounding-level).
double oval_base_stream_at(double q, double X, double Y);

/// Stationary points of the closed form, from the explicit radical:
/// always the origin; for q above sqrt(2)-1 additionally (+-X*, 0) with
/// X* = f_q(n) and n^2 = (q^2+2q-1) / (q+2q^2-q^3). Returned in physical
/// coordinates, origin first.
std::vector<Vec2> oval_critical_points(double q);

enum class CriticalKind { Minimum, Maximum, Saddle, Degenerate };

struct CriticalPoint {
    Vec2 location;       ///< physical coordinates
    CriticalKind kind;
    int sign_low = 0;    ///< sign of the smaller Hessian eigenvalue
    int sign_high = 0;   ///< sign of the larger Hessian eigenvalue
    double value = 0.0;  ///< field value at the point
    double det_hessian = 0.0;
};

struct MorseReport {
    std::vector<CriticalPoint> points; ///< sorted by |location|
    bool is_morse = true;              ///< no degenerate points, no unresolved seeds
    int unresolved_seeds = 0;          ///< gradient-minimum seeds Newton could not settle
};

/// Finds and classifies the stationary points of a field: seeds at grid-node
/// local minima of |grad f|, Newton refinement on the interpolated gradient,
/// classification by the eigenvalue signs of the interpolated Hessian.
/// Nondegeneracy requires |det H| above 1e-6 times a C^2-size estimate of f.
MorseReport morse_classify(const ScalarField2D& f, double newton_tol = 1e-10);

/// Solves laplacian(psi) = 1 + lambda * psi with zero boundary data on an
/// oval grid by fixed-point iteration around the closed-form base state.
/// lambda = 0 returns the base state itself with zero iterations. Throws
/// NonContraction when successive increments stop shrinking (lambda too
/// large for the domain), IterationStall at the iteration cap.
ScalarField2D solve_semilinear(const GridPtr& grid, double lambda, double tol = 1e-12,
                               int* iterations = nullptr);

} // namespace ef
