#pragma once

#include <vector>

#include "ef/contour.hpp"
#include "ef/field.hpp"
#include "ef/interp.hpp"

namespace ef {

/// A closed trajectory of the Hamiltonian system xdot = perp-grad H.
/// Samples are uniform in physical time: samples[k] sits at t = k T / M,
/// with the seed at k = 0 (the closing point t = T is not repeated).
struct Orbit {
    Vec2 seed;               ///< physical seed point
    double level = 0.0;      ///< H value at the seed
    double T = 0.0;          ///< minimal period (physical time)
    double h_drift = 0.0;    ///< max |H(sample) - level| over the samples
    std::vector<Vec2> samples;  ///< physical points
    std::vector<Vec2> csamples; ///< same points in the integration frame
};

struct TraceOptions {
    double tol = 1e-8;               ///< accepted Hamiltonian drift along the orbit
    double rk_tol = 1e-11;           ///< adaptive integrator relative tolerance
    double max_step = 0.05;          ///< time-step cap
    double t_max = 1e4;              ///< give up beyond this time (NonClosingOrbit)
    double closure_radius = 1e-4;    ///< section-crossing acceptance radius (c frame)
    int resamples = 2048;            ///< uniform-in-time samples stored on the orbit
    double critical_fraction = 1e-3; ///< |grad H| dip ratio treated as a critical pass
};

/// Integrates the closed orbit through the physical point x0 with adaptive
/// Runge-Kutta (Dormand-Prince) on the interpolated field; closure is
/// detected on the Poincare section through the seed normal to the flow.
Orbit trace_orbit(const ScalarField2D& H, Vec2 x0, const TraceOptions& opt = {});
Orbit trace_orbit(const FieldSampler& H, Vec2 x0, const TraceOptions& opt = {});

/// Orbit period from the level-curve quadrature of arclength / |grad H|.
double period_coarea(const ScalarField2D& H, const LevelComponent& component);

/// Orbit period as boundary flux of grad H / |grad H|^2 through the inner
/// boundaries plus the divergence integral over the enclosed region between
/// them and the component. Throws CriticalPointInRegion when the region
/// contains a near-critical node.
double period_stokes(const ScalarField2D& H, const LevelComponent& component,
                     const std::vector<LevelComponent>& inner_boundaries);

/// Time average of g over one period of the orbit.
double orbit_mean(const ScalarField2D& g, const Orbit& orbit);
double orbit_mean(const FieldSampler& g, const Orbit& orbit);

/// Traces orbits at n_levels uniformly spaced levels spanning
/// [H(seed) - half_width, H(seed) + half_width] on the connected family
/// through the seed. Throws BandContainsCriticalValue when the band walk
/// crosses a critical level (detected by gradient-walk blowup, enclosed-area
/// jumps, centroid jumps, or trace failures).
std::vector<Orbit> regular_tube(const ScalarField2D& H, Vec2 seed, double half_width,
                                int n_levels = 33, const TraceOptions& opt = {});

/// Solves perp-grad H . grad f = g on the tube covered by the orbit family:
/// per orbit, the running physical-time primitive of g, closed by linear
/// detrending of the quadrature defect and normalized to zero time mean,
/// then written back to grid nodes by phase projection onto the bracketing
/// orbits and level interpolation. Zero outside the tube. Throws NotInRange
/// when some orbit mean of g exceeds mean_tol_rel * ||g||_inf, and
/// CriticalSupport when the support of g touches near-critical nodes.
ScalarField2D transport_right_inverse(const ScalarField2D& H, const ScalarField2D& g,
                                      const std::vector<Orbit>& family,
                                      double mean_tol_rel = 1e-3);

} // namespace ef
