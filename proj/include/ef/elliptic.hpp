#pragma once

#include <optional>

#include "ef/field.hpp"

namespace ef {

enum class EllipticBC { Dirichlet, Periodic };

/// A linear problem (laplacian - V) u = rhs on one of the supported grids.
/// On oval grids the physical Laplacian is pulled back to the disk through
/// the conformal factor; `conformal_override` substitutes a custom factor
/// (defaults to the grid's own).
struct EllipticProblem {
    GridPtr grid;
    std::optional<ScalarField2D> potential;
    EllipticBC bc = EllipticBC::Dirichlet;
    std::optional<ScalarField2D> conformal_override;

    static EllipticProblem dirichlet(GridPtr g) {
        EllipticProblem p;
        p.grid = std::move(g);
        return p;
    }
    static EllipticProblem dirichlet(GridPtr g, ScalarField2D V) {
        EllipticProblem p;
        p.grid = std::move(g);
        p.potential = std::move(V);
        return p;
    }
    static EllipticProblem periodic(GridPtr g, ScalarField2D V) {
        EllipticProblem p;
        p.grid = std::move(g);
        p.potential = std::move(V);
        p.bc = EllipticBC::Periodic;
        return p;
    }
};

struct InvertibilityReport {
    double eigenvalue = 0.0; ///< signed estimate of the eigenvalue nearest 0
    double floor = 0.0;      ///< invertibility threshold used for the verdict
    bool invertible = false;
    int near_kernel_dim = 0; ///< eigenvalue count below the floor (periodic
                             ///< spectral path; 0/1 for Dirichlet problems)
    int iterations = 0;
};

/// Solves (laplacian - V) u = rhs with homogeneous Dirichlet data. Direct
/// FFT+tridiagonal solve when V is absent (or constant on a disk grid);
/// otherwise preconditioned conjugate gradients wrapped around that direct
/// solver. The residual in the discrete operator is at most 1e-10 relative.
ScalarField2D solve_dirichlet(const EllipticProblem& problem, const ScalarField2D& rhs);

/// Applies the same discrete operator the solvers invert: physical-frame
/// (laplacian - V) u. Boundary rows carry the one-sided stencil value and
/// are not part of the solved equations.
ScalarField2D apply_schrodinger(const EllipticProblem& problem, const ScalarField2D& u);

/// Signed estimate of the eigenvalue of (laplacian - V) nearest zero, by
/// inverse power iteration (Dirichlet) or exact Fourier symbols (periodic,
/// constant potential). Invertible verdict iff the magnitude exceeds
/// 1e-6 * max(1, ||V||_inf).
InvertibilityReport invertibility_probe(const EllipticProblem& problem);

/// Torus solve of (laplacian + 2) u = P rhs where P removes the four
/// wavenumber-(±1, ±1) modes; the output is discretely orthogonal to that
/// kernel. Implemented with the exact Fourier symbol 2 - |k|^2.
ScalarField2D torus_helmholtz_solve(const ScalarField2D& rhs);

/// L2-orthogonal projection onto span{sin x sin y, sin x cos y,
/// cos x sin y, cos x cos y} on the torus.
ScalarField2D kernel_projection(const ScalarField2D& f);

/// Operator norm of the inverse Laplacian on the grid (reciprocal of the
/// smallest-magnitude Laplacian eigenvalue; mean-free sector on the torus).
double inverse_laplacian_norm(const GridPtr& grid);

/// Fast direct solver for (computational-frame laplacian - shift) u = rhs
/// on a polar grid with Dirichlet outer boundary: FFT across each ring and
/// a precomputed tridiagonal factorization per Fourier mode. Immutable and
/// shareable once constructed.
class DiskPoissonSolver {
public:
    explicit DiskPoissonSolver(GridPtr grid, double shift = 0.0);
    ~DiskPoissonSolver();
    DiskPoissonSolver(const DiskPoissonSolver&) = delete;
    DiskPoissonSolver& operator=(const DiskPoissonSolver&) = delete;

    /// rhs is in the computational frame (conformal factor already applied).
    ScalarField2D solve(const ScalarField2D& rhs_comp) const;

    const GridPtr& grid() const { return grid_; }
    double shift() const { return shift_; }

private:
    struct Impl;
    GridPtr grid_;
    double shift_;
    Impl* impl_;
};

} // namespace ef
