#pragma once

#include <array>
#include <string>
#include <vector>

#include "ef/field.hpp"
#include "ef/transport.hpp"

namespace ef {

/// Vorticity statistics along the components of one level set.
struct LevelProbe {
    double level = 0.0;
    std::vector<double> means;    ///< arclength-weighted vorticity mean per component
    std::vector<double> spreads;  ///< arclength-weighted standard deviation per component
    double gap = 0.0;             ///< largest pairwise difference of component means
    double threshold = 0.0;       ///< gap needed to count as a genuine branch split
};

/// Outcome of probing whether vorticity is a single-valued function of the
/// stream values: a level set whose components carry cleanly separated
/// vorticity means certifies that no pointwise relation can hold.
struct ViolationReport {
    std::vector<LevelProbe> probes;
    double max_gap = 0.0;
    bool multivalued = false;
    std::vector<std::array<double, 2>> scatter;  ///< (stream value, vorticity) samples
    std::string verdict() const { return multivalued ? "multivalued" : "semilinear"; }
};

/// Nine-point conserving Jacobian {a, b} = perp_grad(a) . grad(b) on the
/// computational lattice, pushed to the physical frame through the cell
/// weights. The weighted grid sum of {a,b} * c is antisymmetric under any
/// swap of a, b, c, which is what quadratic-invariant bookkeeping needs;
/// output is zeroed on the pole row and on non-wrapping boundary rows and
/// columns.
ScalarField2D conserving_bracket(const ScalarField2D& a, const ScalarField2D& b);

/// Probes the listed level values. Each level is traced into closed
/// components; the vorticity of `psi` is sampled along each component and
/// the arclength-weighted mean and spread are recorded. The verdict is
/// "multivalued" when some level shows a cross-component mean gap exceeding
/// max(5 * largest spread, 10 * median cell area). Levels whose sets cannot
/// be traced propagate EmptyLevel / NearCriticalLevel.
ViolationReport semilinear_violation(const ScalarField2D& psi, const std::vector<double>& levels);

/// Pointwise alignment of grad(psi) with grad(laplacian(psi)).
struct CollinearityReport {
    double max_defect = 0.0;
    ScalarField2D defect;  ///< per-node defect; zero at skipped nodes
};

/// Measures |grad psi x grad w| / (|grad psi| |grad w| + |grad psi|^2) with
/// w = laplacian(psi) at every node where |grad psi| exceeds 3% of its
/// maximum, skipping a 2-node boundary collar. The |grad psi|^2 term in the
/// denominator keeps rounding noise in `w` from registering when `w` is
/// constant along streamlines to discretization accuracy; the gradient cut
/// keeps nodes where that noise rivals |grad psi| itself out of the
/// statistic, which would otherwise pin the defect at order one no matter
/// how aligned the field is.
CollinearityReport collinearity_check(const ScalarField2D& psi);

/// Field of local proportionality factors between the two gradients.
struct ArnoldReport {
    double min = 0.0;  ///< over retained nodes
    double max = 0.0;  ///< over retained nodes
    ScalarField2D ratio;     ///< (grad psi . grad w)/|grad psi|^2; median-filled off the retained set
    ScalarField2D retained;  ///< 1 where measured directly, 0 where filled
};

/// Computes the ratio field (grad psi . grad laplacian(psi)) / |grad psi|^2,
/// excluding a 3h neighborhood of every critical point and nodes with small
/// |grad psi|. Throws CollinearityViolation when the alignment defect on the
/// retained set exceeds `collinearity_tol` (the ratio is only meaningful
/// when the gradients are actually parallel).
ArnoldReport arnold_ratio(const ScalarField2D& psi, double collinearity_tol = 0.1);

/// Quadratic form J = 1/2 <w^2, 1/ratio> - 1/2 <w, inv_laplacian w> built
/// from the Arnold ratio field of the base state; conserved by the
/// linearized dynamics around psi0. Throws ArnoldViolation when the ratio
/// field is not strictly positive. (The evolution trace in
/// evolve_linearized uses the calibrated constant in place of the nodal
/// ratio field, so the two values of J agree to the ratio's scatter.)
double casimir_form(const ScalarField2D& psi0, const ScalarField2D& omega_tilde);

/// Trajectory summary of the linearized vorticity evolution.
struct LinearEvolution {
    std::vector<double> times;
    std::vector<double> J;   ///< quadratic invariant at each sample time
    std::vector<double> l2;  ///< perturbation norm at each sample time
    double cfl_limit = 0.0;  ///< largest admissible time step for the base flow
    double dt = 0.0;
    ScalarField2D omega_final;
};

/// Integrates d/dt w + {psi0, w} + {inv_laplacian w, w0} = 0 with classical
/// RK4, where w0 = laplacian(psi0) and braces are the Jacobian. Uses the
/// energy-conserving nine-point Jacobian so the invariant drift comes from
/// the time stepper alone. Requires a grid with a Dirichlet-type boundary
/// and throws CFLViolation when dt exceeds the advective stability limit.
/// A base state that is not steady fails the gradient-alignment gate inside
/// the invariant's weight construction (CollinearityViolation), since a
/// field is steady exactly when its vorticity gradient is parallel to its
/// own gradient.
LinearEvolution evolve_linearized(const ScalarField2D& psi0, const ScalarField2D& omega_init,
                                  double t_end, double dt);

/// Decomposition under the group generated by the diagonal swap
/// (x,y) -> (y,x) and the point reflection (x,y) -> (-x,-y).
struct SymmetrySplit {
    ScalarField2D even;      ///< group-averaged (invariant) part
    ScalarField2D odd;       ///< complement: input minus the invariant part
    double norm_even = 0.0;  ///< weighted L2 norm of the invariant part
    double norm_odd = 0.0;   ///< weighted L2 norm of the complement
};

/// Splits a square-torus field into its average over the reflection group
/// and the complement; the two parts always sum back to the input exactly.
/// Throws AsymmetricGrid unless the grid is a torus with nx == ny.
SymmetrySplit symmetry_split(const ScalarField2D& psi);

/// Weighted-Poincare comparison of a test function against its advective
/// derivative along the level sets of H.
struct HardyReport {
    double ratio = 0.0;        ///< numerator / denominator
    double numerator = 0.0;    ///< integral of f^2 / T(H)^2
    double denominator = 0.0;  ///< integral of |perp_grad(H) . grad f|^2
    double excluded_measure = 0.0;  ///< area fraction dropped near the separatrix
    double threshold = 0.0;    ///< admissible ratio
    bool vacuous = false;      ///< both integrals vanish
    bool pass = false;
};

/// Checks integral f^2/T^2 <= C * integral |perp_grad(H) . grad f|^2 on a
/// square torus, with the orbit period T(H) interpolated from `periods` (a
/// family of traced orbits at positive levels of |H|). Nodes within 3h of
/// the separatrix {H = 0} are excluded and their measure reported. The test
/// function must be odd under the diagonal swap and under point reflection
/// (this forces zero orbit means); otherwise throws SymmetryViolation.
HardyReport hardy_check(const ScalarField2D& H, const ScalarField2D& f,
                        const std::vector<Orbit>& periods, double constant = 1.0);

}  // namespace ef
