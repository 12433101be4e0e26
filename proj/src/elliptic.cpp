#include "ef/elliptic.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstring>
#include <mutex>
#include <random>
#include <string>
#include <vector>

#include "ef/ops.hpp"

namespace ef {

namespace {

bool polar_kind(const Grid2D& g) {
    return g.kind() == GridKind::DiskPolar || g.kind() == GridKind::OvalMapped;
}

/// Computational-frame flux-form Laplacian on a polar grid: exactly the
/// matrix DiskPoissonSolver inverts. Boundary row entries are left 0 (the
/// boundary is data, not an unknown).
ScalarField2D comp_laplacian(const ScalarField2D& f) {
    const Grid2D& g = *f.grid();
    const double dr = g.dy(), dt = g.dx();
    const int nr = g.nr(), nt = g.nx();
    ScalarField2D out(f.grid());
    double ring = 0.0;
    for (int i = 0; i < nt; ++i) ring += f.at(1, i);
    const double lap0 = 4.0 / (dr * dr) * (ring / nt - f.at(0, 0));
    par::for_each(static_cast<std::int64_t>(g.size()), [&](std::int64_t k) {
        const int j = g.row(k), i = g.col(k);
        if (j == 0) {
            out[k] = lap0;
            return;
        }
        if (j == nr) {
            out[k] = 0.0;
            return;
        }
        const double r = j * dr;
        const double flux = (r + dr / 2) * (f.at(j + 1, i) - f.at(j, i)) -
                            (r - dr / 2) * (f.at(j, i) - f.at(j - 1, i));
        const double ftt = f.at(j, i + 1) - 2.0 * f.at(j, i) + f.at(j, i - 1);
        out[k] = flux / (r * dr * dr) + ftt / (r * r * dt * dt);
    });
    return out;
}

/// Computational cell areas: the physical quadrature weight with the
/// conformal factor removed. The flux Laplacian is self-adjoint under this
/// inner product (origin row counted through its aliased split weights).
double comp_weight(const Grid2D& g, std::size_t k) { return g.weight(k) / g.conformal(k); }

double interior_inner(const Grid2D& g, const ScalarField2D& a, const ScalarField2D& b) {
    double s = 0.0;
    for (std::size_t k = 0; k < g.size(); ++k)
        if (!g.is_boundary(k)) s += comp_weight(g, k) * a[k] * b[k];
    return s;
}

double physical_inner(const Grid2D& g, const ScalarField2D& a, const ScalarField2D& b) {
    double s = 0.0;
    for (std::size_t k = 0; k < g.size(); ++k)
        if (!g.is_boundary(k)) s += g.weight(k) * a[k] * b[k];
    return s;
}

ScalarField2D conformal_field(const EllipticProblem& p) {
    if (p.conformal_override) return *p.conformal_override;
    ScalarField2D d(p.grid);
    for (std::size_t k = 0; k < p.grid->size(); ++k) d[k] = p.grid->conformal(k);
    return d;
}

bool nearly_constant(const ScalarField2D& f, double* value) {
    double lo = f[0], hi = f[0];
    for (std::size_t k = 1; k < f.size(); ++k) {
        lo = std::min(lo, f[k]);
        hi = std::max(hi, f[k]);
    }
    *value = 0.5 * (lo + hi);
    return hi - lo <= 1e-13 * std::max(1.0, std::abs(*value));
}

std::shared_ptr<const DiskPoissonSolver> cached_core(const GridPtr& grid, double shift) {
    struct Entry {
        std::weak_ptr<const Grid2D> grid;
        double shift;
        std::shared_ptr<const DiskPoissonSolver> solver;
    };
    static std::mutex mu;
    static std::vector<Entry> cache;
    std::lock_guard<std::mutex> lock(mu);
    for (auto it = cache.begin(); it != cache.end();) {
        if (it->grid.expired()) {
            it = cache.erase(it);
            continue;
        }
        if (it->grid.lock().get() == grid.get() && it->shift == shift) return it->solver;
        ++it;
    }
    auto solver = std::make_shared<DiskPoissonSolver>(grid, shift);
    cache.push_back({grid, shift, solver});
    if (cache.size() > 16) cache.erase(cache.begin());
    return solver;
}

void check_problem_fields(const EllipticProblem& p, const ScalarField2D& rhs, const char* who) {
    if (!p.grid) throw Error(std::string(who) + ": problem has no grid");
    if (!p.grid->same_as(*rhs.grid())) throw Error(std::string(who) + ": field grid mismatch");
    if (p.potential) check_same_grid(*p.potential, rhs, who);
    if (p.conformal_override) check_same_grid(*p.conformal_override, rhs, who);
}

} // namespace

// ---------------------------------------------------------------------------
// DiskPoissonSolver

struct DiskPoissonSolver::Impl {
    int nx = 0, ny = 0, nr = 0, nh = 0;
    double dr = 0.0;
    fftw_plan fwd = nullptr, bwd = nullptr;
    double* rbuf = nullptr;
    fftw_complex* cbuf = nullptr;
    // Thomas factorization per Fourier mode m = 0..nx/2. Mode 0 has nr
    // unknowns (origin + rings 1..nr-1); higher modes nr-1 (rings only).
    std::vector<std::vector<double>> sub, cprime, dinv;

    ~Impl() {
        if (fwd) fftw_destroy_plan(fwd);
        if (bwd) fftw_destroy_plan(bwd);
        if (rbuf) fftw_free(rbuf);
        if (cbuf) fftw_free(cbuf);
    }
};

DiskPoissonSolver::DiskPoissonSolver(GridPtr grid, double shift)
    : grid_(std::move(grid)), shift_(shift), impl_(new Impl) {
    const Grid2D& g = *grid_;
    if (!polar_kind(g)) throw Error("DiskPoissonSolver: needs a polar grid");
    Impl& im = *impl_;
    im.nx = g.nx();
    im.ny = g.ny();
    im.nr = g.nr();
    im.nh = im.nx / 2 + 1;
    im.dr = g.dy();
    im.rbuf = fftw_alloc_real(static_cast<std::size_t>(im.nx) * im.ny);
    im.cbuf = fftw_alloc_complex(static_cast<std::size_t>(im.nh) * im.ny);
    const int n[1] = {im.nx};
    im.fwd = fftw_plan_many_dft_r2c(1, n, im.ny, im.rbuf, nullptr, 1, im.nx, im.cbuf, nullptr, 1,
                                    im.nh, FFTW_ESTIMATE);
    im.bwd = fftw_plan_many_dft_c2r(1, n, im.ny, im.cbuf, nullptr, 1, im.nh, im.rbuf, nullptr, 1,
                                    im.nx, FFTW_ESTIMATE);
    if (!im.fwd || !im.bwd) throw SolverBreakdown("DiskPoissonSolver: FFT planning failed");

    const double dr = im.dr, dt = g.dx();
    im.sub.resize(im.nh);
    im.cprime.resize(im.nh);
    im.dinv.resize(im.nh);
    for (int m = 0; m < im.nh; ++m) {
        const double kappa = (2.0 - 2.0 * std::cos(m * dt)) / (dt * dt);
        const int nun = (m == 0) ? im.nr : im.nr - 1;
        std::vector<double> a(nun, 0.0), b(nun, 0.0), c(nun, 0.0);
        for (int t = 0; t < nun; ++t) {
            const int j = (m == 0) ? t : t + 1;
            if (m == 0 && t == 0) {
                b[t] = -4.0 / (dr * dr) - shift_;
                c[t] = 4.0 / (dr * dr);
                continue;
            }
            const double r = j * dr;
            const double lo = (r - dr / 2) / (r * dr * dr);
            const double hi = (r + dr / 2) / (r * dr * dr);
            b[t] = -(lo + hi) - kappa / (r * r) - shift_;
            c[t] = hi;
            // The coupling below drops at the innermost unknown: mode 0
            // couples to the origin through t-1 itself, higher modes have no
            // origin amplitude.
            a[t] = (m != 0 && j == 1) ? 0.0 : lo;
        }
        c[nun - 1] = 0.0; // Dirichlet boundary closes the system
        // Thomas factorization (diagonally dominant, no pivoting needed).
        std::vector<double> cp(nun, 0.0), di(nun, 0.0);
        double d = b[0];
        if (std::abs(d) < 1e-300) throw SingularOperator("DiskPoissonSolver: zero pivot");
        di[0] = 1.0 / d;
        cp[0] = c[0] * di[0];
        for (int t = 1; t < nun; ++t) {
            d = b[t] - a[t] * cp[t - 1];
            if (std::abs(d) < 1e-300) throw SingularOperator("DiskPoissonSolver: zero pivot");
            di[t] = 1.0 / d;
            cp[t] = c[t] * di[t];
        }
        im.sub[m] = std::move(a);
        im.cprime[m] = std::move(cp);
        im.dinv[m] = std::move(di);
    }
}

DiskPoissonSolver::~DiskPoissonSolver() { delete impl_; }

ScalarField2D DiskPoissonSolver::solve(const ScalarField2D& rhs_comp) const {
    const Grid2D& g = *grid_;
    if (!g.same_as(*rhs_comp.grid())) throw Error("DiskPoissonSolver::solve: grid mismatch");
    const Impl& im = *impl_;
    double* rb = fftw_alloc_real(static_cast<std::size_t>(im.nx) * im.ny);
    fftw_complex* cb = fftw_alloc_complex(static_cast<std::size_t>(im.nh) * im.ny);
    std::memcpy(rb, rhs_comp.data(), sizeof(double) * g.size());
    fftw_execute_dft_r2c(im.fwd, rb, cb);

    par::for_each(im.nh, [&](std::int64_t m) {
        const auto& a = im.sub[m];
        const auto& cp = im.cprime[m];
        const auto& di = im.dinv[m];
        const int nun = static_cast<int>(a.size());
        std::vector<std::complex<double>> y(nun);
        const auto slot = [&](int j) -> std::complex<double>& {
            return reinterpret_cast<std::complex<double>*>(cb)[static_cast<std::size_t>(j) * im.nh +
                                                              m];
        };
        // forward sweep
        for (int t = 0; t < nun; ++t) {
            const int j = (m == 0) ? t : t + 1;
            std::complex<double> r = slot(j);
            if (t > 0) r -= a[t] * y[t - 1];
            y[t] = r * di[t];
        }
        // back substitution
        for (int t = nun - 2; t >= 0; --t) y[t] -= cp[t] * y[t + 1];
        for (int t = 0; t < nun; ++t) slot((m == 0) ? t : t + 1) = y[t];
        if (m != 0) slot(0) = 0.0;   // origin carries no higher harmonics
        slot(im.ny - 1) = 0.0;       // Dirichlet boundary row
    });

    fftw_execute_dft_c2r(im.bwd, cb, rb);
    ScalarField2D out(grid_);
    const double scale = 1.0 / im.nx;
    par::for_each(static_cast<std::int64_t>(g.size()),
                  [&](std::int64_t k) { out[k] = rb[k] * scale; });
    // The origin row is a single unknown; pin the aliased entries exactly.
    const double u0 = out[g.index(0, 0)];
    for (int i = 1; i < im.nx; ++i) out[g.index(0, i)] = u0;
    for (int i = 0; i < im.nx; ++i) out[g.index(im.ny - 1, i)] = 0.0;
    fftw_free(rb);
    fftw_free(cb);
    return out;
}

// ---------------------------------------------------------------------------
// Dirichlet solve

ScalarField2D apply_schrodinger(const EllipticProblem& p, const ScalarField2D& u) {
    check_problem_fields(p, u, "apply_schrodinger");
    const Grid2D& g = *p.grid;
    ScalarField2D out = ops::laplacian(u);
    if (p.conformal_override) {
        const ScalarField2D& d = *p.conformal_override;
        par::for_each(static_cast<std::int64_t>(u.size()),
                      [&](std::int64_t k) { out[k] *= g.conformal(k) / d[k]; });
    }
    if (p.potential) {
        const ScalarField2D& V = *p.potential;
        par::for_each(static_cast<std::int64_t>(u.size()),
                      [&](std::int64_t k) { out[k] -= V[k] * u[k]; });
    }
    return out;
}

namespace {

/// Relative interior residual of the discrete equation.
double relative_residual(const EllipticProblem& p, const ScalarField2D& u,
                         const ScalarField2D& rhs) {
    ScalarField2D res = apply_schrodinger(p, u);
    res -= rhs;
    const double denom = std::max(rhs.l2(1), 1e-30);
    return res.l2(1) / denom;
}

ScalarField2D pcg_solve(const EllipticProblem& p, const ScalarField2D& rhs,
                        const ScalarField2D& dfield) {
    const Grid2D& g = *p.grid;
    const auto core = cached_core(p.grid, 0.0);
    const ScalarField2D& V = *p.potential;

    // Solve B u = f with B = -(comp_laplacian - D V) symmetric positive
    // definite under the computational weights, f = -D rhs, preconditioned
    // by the direct inverse of -comp_laplacian.
    const auto apply_B = [&](const ScalarField2D& x) {
        ScalarField2D ax = comp_laplacian(x);
        par::for_each(static_cast<std::int64_t>(g.size()), [&](std::int64_t k) {
            ax[k] = -(ax[k] - dfield[k] * V[k] * x[k]);
            if (g.is_boundary(k)) ax[k] = 0.0;
        });
        return ax;
    };
    const auto precond = [&](const ScalarField2D& r) {
        ScalarField2D mr = core->solve(r);
        mr *= -1.0;
        return mr;
    };

    ScalarField2D f(p.grid);
    par::for_each(static_cast<std::int64_t>(g.size()), [&](std::int64_t k) {
        f[k] = g.is_boundary(k) ? 0.0 : -dfield[k] * rhs[k];
    });

    ScalarField2D x(p.grid, 0.0);
    ScalarField2D r = f;
    ScalarField2D z = precond(r);
    ScalarField2D d = z;
    double rz = interior_inner(g, r, z);
    const double f_norm = std::sqrt(std::max(interior_inner(g, f, f), 0.0));
    if (f_norm == 0.0) return x;
    const double tol = 1e-13 * f_norm;
    const int max_iter = 300;
    for (int it = 0; it < max_iter; ++it) {
        const ScalarField2D bd = apply_B(d);
        const double dbd = interior_inner(g, d, bd);
        if (!(dbd > 0.0))
            throw SolverBreakdown("solve_dirichlet: operator lost definiteness (d^T B d = " +
                                  std::to_string(dbd) + "); potential too large for this solver");
        const double alpha = rz / dbd;
        par::for_each(static_cast<std::int64_t>(g.size()), [&](std::int64_t k) {
            x[k] += alpha * d[k];
            r[k] -= alpha * bd[k];
        });
        if (std::sqrt(std::max(interior_inner(g, r, r), 0.0)) <= tol) return x;
        z = precond(r);
        const double rz_new = interior_inner(g, r, z);
        const double beta = rz_new / rz;
        rz = rz_new;
        par::for_each(static_cast<std::int64_t>(g.size()),
                      [&](std::int64_t k) { d[k] = z[k] + beta * d[k]; });
    }
    throw SolverBreakdown("solve_dirichlet: conjugate gradients failed to converge in " +
                          std::to_string(max_iter) + " iterations");
}

} // namespace

ScalarField2D solve_dirichlet(const EllipticProblem& p, const ScalarField2D& rhs) {
    check_problem_fields(p, rhs, "solve_dirichlet");
    if (p.bc != EllipticBC::Dirichlet)
        throw Error("solve_dirichlet: periodic problems go through torus_helmholtz_solve");
    const Grid2D& g = *p.grid;
    if (!polar_kind(g)) throw Error("solve_dirichlet: needs a polar grid");

    const ScalarField2D dfield = conformal_field(p);
    ScalarField2D u;
    double vconst = 0.0;
    const bool disk_plain = g.kind() == GridKind::DiskPolar && !p.conformal_override;
    if (!p.potential) {
        ScalarField2D rhs_c(p.grid);
        par::for_each(static_cast<std::int64_t>(g.size()),
                      [&](std::int64_t k) { rhs_c[k] = dfield[k] * rhs[k]; });
        u = cached_core(p.grid, 0.0)->solve(rhs_c);
    } else if (disk_plain && nearly_constant(*p.potential, &vconst)) {
        u = cached_core(p.grid, vconst)->solve(rhs);
    } else {
        u = pcg_solve(p, rhs, dfield);
    }

    const double rel = relative_residual(p, u, rhs);
    if (!(rel <= 1e-10))
        throw SolverBreakdown("solve_dirichlet: residual " + std::to_string(rel) +
                              " exceeds tolerance");
    return u;
}

// ---------------------------------------------------------------------------
// Invertibility probe

namespace {

InvertibilityReport probe_torus_spectral(const EllipticProblem& p) {
    double v0 = 0.0;
    if (!nearly_constant(*p.potential, &v0))
        throw Error("invertibility_probe: periodic probe supports constant potentials only");
    const Grid2D& g = *p.grid;
    const double floor = 1e-6 * std::max(1.0, std::abs(v0));
    double best = 1e300;
    int dim = 0;
    for (int k2 = -g.ny() / 2; k2 < g.ny() / 2; ++k2)
        for (int k1 = -g.nx() / 2; k1 < g.nx() / 2; ++k1) {
            const double lam = -static_cast<double>(k1 * k1 + k2 * k2) - v0;
            if (std::abs(lam) < std::abs(best)) best = lam;
            if (std::abs(lam) < floor) ++dim;
        }
    InvertibilityReport rep;
    rep.eigenvalue = best;
    rep.floor = floor;
    rep.near_kernel_dim = dim;
    rep.invertible = std::abs(best) > floor;
    rep.iterations = 0;
    return rep;
}

} // namespace

InvertibilityReport invertibility_probe(const EllipticProblem& p) {
    if (!p.grid) throw Error("invertibility_probe: problem has no grid");
    const Grid2D& g = *p.grid;
    if (p.bc == EllipticBC::Periodic || g.kind() == GridKind::Torus) {
        if (!p.potential) throw Error("invertibility_probe: periodic probe needs a potential");
        return probe_torus_spectral(p);
    }
    if (!polar_kind(g)) throw Error("invertibility_probe: unsupported grid kind");

    // Inverse power iteration with deterministic seeding; the Rayleigh
    // quotient <w, u> / <w, w> with u the previous iterate gives the signed
    // eigenvalue without an extra operator application.
    std::mt19937_64 rng(12345);
    std::uniform_real_distribution<double> ud(-1.0, 1.0);
    ScalarField2D u(p.grid);
    for (std::size_t k = 0; k < g.size(); ++k) u[k] = g.is_boundary(k) ? 0.0 : ud(rng);
    const double u00 = u[g.index(0, 0)];
    for (int i = 0; i < g.nx(); ++i) u[g.index(0, i)] = u00;
    double nrm = std::sqrt(physical_inner(g, u, u));
    u *= 1.0 / nrm;

    double lambda = 0.0;
    const double vinf = p.potential ? p.potential->linf() : 0.0;
    const double floor = 1e-6 * std::max(1.0, vinf);
    const int max_iter = 100;
    for (int it = 1; it <= max_iter; ++it) {
        ScalarField2D w;
        try {
            w = solve_dirichlet(p, u);
        } catch (const SolverBreakdown& e) {
            throw IterationStall(std::string("invertibility_probe: inner solve failed: ") +
                                 e.what());
        }
        const double wu = physical_inner(g, w, u);
        const double ww = physical_inner(g, w, w);
        if (!(ww > 0.0)) throw IterationStall("invertibility_probe: iterate collapsed");
        const double lambda_new = wu / ww;
        const bool done = std::abs(lambda_new - lambda) <= 1e-10 * std::max(1.0, std::abs(lambda_new));
        lambda = lambda_new;
        u = w;
        u *= 1.0 / std::sqrt(ww);
        if (done && it > 2) {
            InvertibilityReport rep;
            rep.eigenvalue = lambda;
            rep.floor = floor;
            rep.invertible = std::abs(lambda) > floor;
            rep.near_kernel_dim = rep.invertible ? 0 : 1;
            rep.iterations = it;
            return rep;
        }
    }
    throw IterationStall("invertibility_probe: no convergence in " + std::to_string(max_iter) +
                         " iterations");
}

// ---------------------------------------------------------------------------
// Torus Helmholtz and kernel handling

ScalarField2D torus_helmholtz_solve(const ScalarField2D& rhs) {
    const Grid2D& g = *rhs.grid();
    if (g.kind() != GridKind::Torus) throw Error("torus_helmholtz_solve: needs a torus grid");
    const int nx = g.nx(), ny = g.ny(), nh = nx / 2 + 1;
    double* rb = fftw_alloc_real(static_cast<std::size_t>(nx) * ny);
    fftw_complex* cb = fftw_alloc_complex(static_cast<std::size_t>(nh) * ny);
    std::memcpy(rb, rhs.data(), sizeof(double) * g.size());
    fftw_plan fwd = fftw_plan_dft_r2c_2d(ny, nx, rb, cb, FFTW_ESTIMATE);
    fftw_plan bwd = fftw_plan_dft_c2r_2d(ny, nx, cb, rb, FFTW_ESTIMATE);
    fftw_execute(fwd);
    auto* cc = reinterpret_cast<std::complex<double>*>(cb);
    for (int j = 0; j < ny; ++j) {
        const int k2 = (j <= ny / 2) ? j : j - ny;
        for (int i = 0; i < nh; ++i) {
            const int k1 = i;
            const int k_sq = k1 * k1 + k2 * k2;
            std::complex<double>& v = cc[static_cast<std::size_t>(j) * nh + i];
            if (k_sq == 2)
                v = 0.0; // kernel modes are projected out
            else
                v /= (2.0 - static_cast<double>(k_sq));
        }
    }
    fftw_execute(bwd);
    ScalarField2D out(rhs.grid());
    const double scale = 1.0 / (static_cast<double>(nx) * ny);
    for (std::size_t k = 0; k < g.size(); ++k) out[k] = rb[k] * scale;
    fftw_destroy_plan(fwd);
    fftw_destroy_plan(bwd);
    fftw_free(rb);
    fftw_free(cb);
    return out;
}

ScalarField2D kernel_projection(const ScalarField2D& f) {
    const Grid2D& g = *f.grid();
    if (g.kind() != GridKind::Torus) throw Error("kernel_projection: needs a torus grid");
    ScalarField2D out(f.grid());
    for (int mode = 0; mode < 4; ++mode) {
        ScalarField2D e = sample(f.grid(), [mode](double x, double y) {
            switch (mode) {
            case 0: return std::sin(x) * std::sin(y);
            case 1: return std::sin(x) * std::cos(y);
            case 2: return std::cos(x) * std::sin(y);
            default: return std::cos(x) * std::cos(y);
            }
        });
        const double c = f.inner(e) / e.inner(e);
        par::for_each(static_cast<std::int64_t>(g.size()),
                      [&](std::int64_t k) { out[k] += c * e[k]; });
    }
    return out;
}

double inverse_laplacian_norm(const GridPtr& grid) {
    if (grid->kind() == GridKind::Torus) return 1.0; // mean-free sector, |k|^2 >= 1
    const auto rep = invertibility_probe(EllipticProblem::dirichlet(grid));
    return 1.0 / std::abs(rep.eigenvalue);
}

} // namespace ef
