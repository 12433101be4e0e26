#pragma once

#include <complex>

#include "ef/common.hpp"

namespace ef {

using cplx = std::complex<double>;

/// Conformal map w = z / (1 - q z^2) from the closed unit disk onto a
/// Neumann oval, together with its explicit inverse and derivative.
/// Valid for 0 <= q < 1; the poles z = ±1/sqrt(q) then lie outside the
/// closed disk and the map is univalent on it (checked numerically by
/// check_univalence_convexity).
class ConformalOvalMap {
public:
    explicit ConformalOvalMap(double q);

    double q() const { return q_; }

    /// Forward map. Throws PoleProximity when |1 - q z^2| < 1e-9 (the query
    /// point sits essentially on a pole, far outside the closed disk).
    cplx forward(cplx z) const;

    /// Inverse map, evaluated in the cancellation-free form
    ///   z = 2w / (1 + sqrt(1 + 4 q w^2)),
    /// with the removable singularity at the origin handled explicitly
    /// (returns 0 for |w| < 1e-10). Throws OutsideDomain when the round trip
    /// forward(inverse(w)) fails to reproduce w, or the preimage leaves the
    /// closed disk beyond a rounding allowance.
    cplx inverse(cplx w) const;

    /// dw/dz = (1 + q z^2)/(1 - q z^2)^2.
    cplx derivative(cplx z) const;

    /// min over theta of |forward(e^{i theta})|; equals 1/(1+q), attained at
    /// theta = ±pi/2. The exact minimizer is always included in the sample
    /// set so the result does not depend on the sample count.
    double min_boundary_modulus(int samples = 4096) const;

    struct UnivalenceReport {
        /// min over an interior (rho, theta) grid of Re[f'(z)(1 - z^2)];
        /// positivity of this functional on the disk implies univalence and
        /// drives the shape analysis of the oval.
        double min_re_criterion;
        /// min over the boundary circle of |f(e^{i theta})| (>= 1/(1+q)).
        double min_boundary_modulus;
    };

    /// Samples the univalence/convexity functional Re[f'(z)(1 - z^2)] on an
    /// interior polar grid with at least `samples` points (the functional
    /// vanishes identically at the boundary points z = ±1, so interior
    /// sampling is what carries the information), plus the boundary modulus
    /// minimum. Both reported minima must be positive for a healthy map.
    UnivalenceReport check_univalence_convexity(int samples = 4096) const;

private:
    double q_;
};

} // namespace ef
