#pragma once

#include "ef/field.hpp"

namespace ef::ops {

/// Second-order physical gradient: central differences in the interior,
/// one-sided second-order stencils at Dirichlet boundaries, wrap-around on
/// periodic directions. On polar grids the origin value comes from a Fourier
/// projection of the first ring; on oval grids the result is transformed to
/// the physical frame through the conformal map.
VectorField2D gradient(const ScalarField2D& f);

/// Rotated gradient (-df/dy, df/dx).
VectorField2D perp_gradient(const ScalarField2D& f);

/// Second-order physical Laplacian. Polar grids use the conservative
/// flux-form stencil (self-adjoint under the physical quadrature weights,
/// origin handled by the first-ring averaging stencil); this is exactly the
/// operator the fast elliptic solver inverts.
ScalarField2D laplacian(const ScalarField2D& f);

/// Poisson bracket grad_perp(a) . grad(b). Assembled from pointwise products
/// of the same difference stencils on both arguments, so the discrete
/// antisymmetry bracket(a,b) = -bracket(b,a) holds exactly.
ScalarField2D bracket(const ScalarField2D& a, const ScalarField2D& b);

/// Physical divergence of a vector field (same stencil family as gradient).
ScalarField2D divergence(const VectorField2D& v);

} // namespace ef::ops
