#pragma once

#include <map>
#include <string>
#include <vector>

#include "ef/field.hpp"
#include "ef/oval.hpp"
#include "ef/profile.hpp"
#include "ef/transport.hpp"

namespace ef {

/// A localized source supported on a band of stream-function levels on one
/// connected component near a saddle, together with the orbit family that
/// certifies the band's regularity.
struct BumpForcing {
    ScalarField2D eta;        ///< G(psi0) on the selected component's band, 0 elsewhere
    std::vector<Orbit> tube;  ///< orbits of psi0 spanning (slightly more than) the band
    Vec2 x0;                  ///< base point on the selected component, psi0(x0) = level0
    double level0 = 0.0;      ///< band center value
    double eps0 = 0.0;        ///< band half width in value space
    Profile G;                ///< the band shape as a function of the stream value
};

/// Selects a saddle and its nearest companion extremum from the Morse data,
/// places the base point x0 halfway between their values on the segment
/// joining them, and builds eta = G(psi0) on the x0 component of the band
/// |psi0 - level0| < eps0 (zero on the mirror component and beyond the band).
/// eps0 <= 0 selects one quarter of the saddle-to-extremum value gap. The
/// bump template is read in normalized coordinates s = (t - level0)/eps0 and
/// scaled so that max(eta) = 1. Throws NoSaddle when the field has fewer than
/// two critical points or none of saddle type, BandContainsCriticalValue when
/// eps0 reaches half the gap or the band fails to trace.
BumpForcing build_bump_forcing(const ScalarField2D& psi0, const MorseReport& morse,
                               double eps0, const Profile& bump_template);

/// First-order response: solves the linearized vorticity relation for psi1.
/// Dirichlet grids: (laplacian - Fprime_at_psi0) psi1 = eta. Torus grids:
/// requires Fprime_at_psi0 == -2 and solves (laplacian + 2) psi1 = eta with
/// the four-dimensional kernel projected out; throws KernelLeak when eta has
/// a kernel component above 1e-10 relative.
ScalarField2D first_order(const ScalarField2D& psi0, const ScalarField2D& Fprime_at_psi0,
                          const ScalarField2D& eta);

struct ForgeResult {
    ScalarField2D psi0, psi1, psi2, psi_eps, eta;
    double eps = 0.0;                  ///< final perturbation size (after any halving)
    std::vector<double> trace;         ///< max-norm difference of successive iterates
    std::map<std::string, double> diagnostics;
};

/// Picard iteration for the second-order remainder: repeatedly applies
///   psi2 <- (laplacian - F'(psi0))^{-1} L^{-1}_{psi_eps}[ rhs(psi2) ],
/// where rhs collects the F'' quadratic couplings and the advection of eta by
/// the perturbation velocity, and L^{-1} is the transport right-inverse over
/// orbit families of the current psi_eps re-traced from the support of rhs.
/// Divergence (non-decreasing successive differences well above tol) halves
/// eps and restarts; two halvings without convergence raise PicardDivergence.
/// eps = 0 performs the single degenerate application. mean_tol_rel is the
/// per-orbit zero-mean tolerance forwarded to the transport inverse.
ForgeResult forge_remainder(const ScalarField2D& psi0, const ScalarField2D& psi1,
                            const ScalarField2D& eta, const Profile& F, double eps,
                            int max_iter = 40, double tol = 1e-9,
                            double mean_tol_rel = 0.05);

/// Full construction on an oval grid: base state with vorticity law
/// F(t) = 1 + lambda t, bump forcing near the saddle, first-order response,
/// and the remainder iteration. eps0 <= 0 selects the quarter-gap default.
ForgeResult forge_oval(const GridPtr& grid, double lambda, double eps, double eps0 = 0.0,
                       int max_iter = 40, double tol = 1e-9, double mean_tol_rel = 0.05);

/// Full construction on the torus around sin x sin y (vorticity law -2t):
/// eta = G(psi0) on (0, pi)^2 copied to (-pi, 0) x (0, pi) by the half-period
/// shift, zero elsewhere; G must have zero area integral against psi0's level
/// measure (MeanViolation otherwise). The shift copy keeps eta orthogonal to
/// the kernel of laplacian + 2.
ForgeResult forge_cellular(const GridPtr& grid, double eps, const Profile& G,
                           int max_iter = 40, double tol = 1e-9,
                           double mean_tol_rel = 0.05);

/// The forcing field used by forge_cellular, exposed for inspection/tests.
ScalarField2D build_cellular_forcing(const GridPtr& grid, const Profile& G);

/// A band profile B - c B^2 on [center - half_width, center + half_width]
/// with c calibrated on the given torus grid so the area integral of the
/// resulting eta vanishes to rounding.
Profile cellular_mean_zero_bump(const GridPtr& grid, double center = 0.5,
                                double half_width = 0.2);

struct SteadyResidual {
    double l2 = 0.0;
    double linf = 0.0;
    ScalarField2D field;
};

/// The steady-Euler defect grad-perp(psi) . grad(laplacian psi) with norms
/// taken two cells away from Dirichlet boundaries.
SteadyResidual steady_residual(const ScalarField2D& psi);

} // namespace ef
