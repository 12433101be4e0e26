#include "ef/oval.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include "ef/elliptic.hpp"
#include "ef/interp.hpp"
#include "ef/ops.hpp"
#include "ef/oval_map.hpp"

namespace ef {

namespace {

bool polar_kind(const Grid2D& g) {
    return g.kind() == GridKind::DiskPolar || g.kind() == GridKind::OvalMapped;
}

double base_stream_raw(double q, double X, double Y) {
    const std::complex<double> w(X, Y);
    const std::complex<double> w2 = w * w;
    const std::complex<double> root = std::sqrt(1.0 + 4.0 * q * w2);
    return Y * Y / 2 + std::real(w2) / 4 - std::real(root) / (4 * (1 - q * q));
}

} // namespace

double oval_base_stream_at(double q, double X, double Y) { return base_stream_raw(q, X, Y); }

ScalarField2D oval_base_stream(const GridPtr& grid) {
    if (!polar_kind(*grid)) throw Error("oval_base_stream: needs a polar grid");
    const double q = grid->q();
    ScalarField2D psi = sample(grid, [q](double X, double Y) { return base_stream_raw(q, X, Y); });
    // The closed form vanishes on the boundary identically; subtracting the
    // mean boundary-node value removes any residual constant at rounding
    // level and pins the Dirichlet trace.
    double btrace = 0.0;
    int bcount = 0;
    for (std::size_t k = 0; k < grid->size(); ++k)
        if (grid->is_boundary(k)) {
            btrace += psi[k];
            ++bcount;
        }
    btrace /= bcount;
    par::for_each(static_cast<std::int64_t>(grid->size()),
                  [&](std::int64_t k) { psi[k] -= btrace; });
    return psi;
}

std::vector<Vec2> oval_critical_points(double q) {
    if (!(q >= 0.0 && q < 1.0)) throw Error("oval_critical_points: q must lie in [0,1)");
    std::vector<Vec2> pts{{0.0, 0.0}};
    const double radicand = (q * q + 2 * q - 1) / (q + 2 * q * q - q * q * q);
    if (q == 0.0 || radicand <= 0.0) return pts;
    const double n = std::sqrt(radicand);
    const double X = n / (1 - q * n * n); // forward map image of the disk point n
    pts.push_back({X, 0.0});
    pts.push_back({-X, 0.0});
    return pts;
}

// ---------------------------------------------------------------------------
// Morse classification

namespace {

struct Seed {
    Vec2 c;      // c-frame position
    double gmag; // gradient magnitude at the node
};

/// Gradient-magnitude field used only for seeding; zeros coincide with the
/// interpolated gradient's zeros for smooth inputs.
ScalarField2D gradient_magnitude(const ScalarField2D& f) {
    const VectorField2D grad = ops::gradient(f);
    ScalarField2D gmag(f.grid());
    par::for_each(static_cast<std::int64_t>(f.size()),
                  [&](std::int64_t k) { gmag[k] = grad.at(k).norm(); });
    return gmag;
}

bool local_min_at(const ScalarField2D& gmag, int j, int i) {
    const Grid2D& g = *gmag.grid();
    const double center = gmag.at(j, i);
    if (polar_kind(g) && j == 0) {
        for (int ii = 0; ii < g.nx(); ++ii)
            if (gmag.at(1, ii) < center) return false;
        return true;
    }
    for (int dj = -1; dj <= 1; ++dj)
        for (int di = -1; di <= 1; ++di) {
            if (dj == 0 && di == 0) continue;
            const int jj = g.kind() == GridKind::Torus ? g.wrap_row(j + dj) : j + dj;
            const int ii = g.kind() == GridKind::Cartesian ? i + di : g.wrap_col(i + di);
            if (gmag.at(jj, ii) < center) return false;
        }
    return true;
}

Vec2 node_c(const Grid2D& g, int j, int i) {
    const Vec2 comp = g.comp(g.index(j, i));
    if (polar_kind(g)) {
        const double th = comp.x, r = comp.y;
        return {r * std::cos(th), r * std::sin(th)};
    }
    return comp;
}

std::vector<Seed> collect_seeds(const ScalarField2D& f) {
    const Grid2D& g = *f.grid();
    const ScalarField2D gmag = gradient_magnitude(f);
    const double gmax = gmag.linf();
    const double cutoff = 0.1 * gmax;
    std::vector<Seed> seeds;
    for (int j = 0; j < g.ny(); ++j) {
        if (polar_kind(g) && j > g.ny() - 3) break; // no stationary points at the rim
        for (int i = 0; i < g.nx(); ++i) {
            if (polar_kind(g) && j == 0 && i > 0) break; // origin row is one point
            if (g.kind() == GridKind::Cartesian &&
                (j == 0 || i == 0 || j == g.ny() - 1 || i == g.nx() - 1))
                continue;
            const double v = gmag.at(j, i);
            if (v >= cutoff) continue;
            if (local_min_at(gmag, j, i)) seeds.push_back({node_c(g, j, i), v});
        }
    }
    std::sort(seeds.begin(), seeds.end(), [](const Seed& a, const Seed& b) { return a.gmag < b.gmag; });
    if (seeds.size() > 64) seeds.resize(64);
    return seeds;
}

bool inside_c_domain(const Grid2D& g, Vec2 c) {
    if (polar_kind(g)) return c.norm() <= 0.999;
    if (g.kind() == GridKind::Torus) return true;
    return c.x >= g.lo().x && c.x <= g.hi().x && c.y >= g.lo().y && c.y <= g.hi().y;
}

Vec2 wrap_torus_c(const Grid2D& g, Vec2 c) {
    const double Lx = g.hi().x - g.lo().x, Ly = g.hi().y - g.lo().y;
    c.x = g.lo().x + std::fmod(std::fmod(c.x - g.lo().x, Lx) + Lx, Lx);
    c.y = g.lo().y + std::fmod(std::fmod(c.y - g.lo().y, Ly) + Ly, Ly);
    return c;
}

} // namespace

MorseReport morse_classify(const ScalarField2D& f, double newton_tol) {
    const Grid2D& g = *f.grid();
    const FieldSampler sampler(f);
    const std::vector<Seed> seeds = collect_seeds(f);

    MorseReport report;
    const double dedupe_tol = 1e-5;
    const int max_newton = 50;
    const double max_step = 0.1;

    std::vector<Vec2> roots;
    for (const Seed& seed : seeds) {
        Vec2 z = seed.c;
        bool converged = false;
        for (int it = 0; it < max_newton; ++it) {
            const Vec2 grad = sampler.grad_c(z);
            const auto h = sampler.hess_c(z); // {fxx, fxy, fyy}
            const double det = h[0] * h[2] - h[1] * h[1];
            if (std::abs(det) < 1e-14) break;
            Vec2 step{-(h[2] * grad.x - h[1] * grad.y) / det,
                      -(h[0] * grad.y - h[1] * grad.x) / det};
            const double slen = step.norm();
            if (slen > max_step) step = step * (max_step / slen);
            z = z + step;
            if (g.kind() == GridKind::Torus) z = wrap_torus_c(g, z);
            if (!inside_c_domain(g, z)) break;
            if (slen <= newton_tol) {
                converged = true;
                break;
            }
        }
        if (!converged) {
            ++report.unresolved_seeds;
            continue;
        }
        bool fresh = true;
        for (const Vec2& r : roots) {
            Vec2 d = z - r;
            if (g.kind() == GridKind::Torus) {
                const double Lx = g.hi().x - g.lo().x, Ly = g.hi().y - g.lo().y;
                d.x -= Lx * std::round(d.x / Lx);
                d.y -= Ly * std::round(d.y / Ly);
            }
            if (d.norm() < dedupe_tol) {
                fresh = false;
                break;
            }
        }
        if (fresh) roots.push_back(z);
    }

    // C^2-size estimate for the nondegeneracy floor, sampled at the roots
    // and a coarse node subset.
    double c2 = 1e-12;
    const int stride = std::max(1, g.ny() / 8);
    for (int j = 1; j < g.ny() - 1; j += stride)
        for (int i = 0; i < g.nx(); i += stride) {
            const Vec2 c = node_c(g, j, i);
            const auto h = sampler.hess_c(c);
            c2 = std::max({c2, std::abs(sampler.value_c(c)),
                           std::abs(h[0]), std::abs(h[1]), std::abs(h[2])});
        }
    const double det_floor = 1e-6 * c2 * c2;

    for (const Vec2& z : roots) {
        const auto h = sampler.hess_c(z);
        const double det = h[0] * h[2] - h[1] * h[1];
        const double tr = h[0] + h[2];
        const double disc = std::sqrt(std::max(tr * tr / 4 - det, 0.0));
        const double lam1 = tr / 2 - disc, lam2 = tr / 2 + disc;
        CriticalPoint cp;
        cp.location = z;
        if (polar_kind(g)) {
            const cplx w = g.map()->forward(cplx(z.x, z.y));
            cp.location = {w.real(), w.imag()};
        }
        cp.value = sampler.value_c(z);
        cp.det_hessian = det;
        const auto sgn = [](double v) { return v > 0 ? 1 : (v < 0 ? -1 : 0); };
        cp.sign_low = sgn(lam1);
        cp.sign_high = sgn(lam2);
        if (std::abs(det) <= det_floor) {
            cp.kind = CriticalKind::Degenerate;
            report.is_morse = false;
        } else if (det < 0) {
            cp.kind = CriticalKind::Saddle;
        } else {
            cp.kind = tr > 0 ? CriticalKind::Minimum : CriticalKind::Maximum;
        }
        report.points.push_back(cp);
    }
    if (report.unresolved_seeds > 0) report.is_morse = false;
    std::sort(report.points.begin(), report.points.end(),
              [](const CriticalPoint& a, const CriticalPoint& b) {
                  return a.location.norm() < b.location.norm();
              });
    return report;
}

// ---------------------------------------------------------------------------
// Semilinear base solve

ScalarField2D solve_semilinear(const GridPtr& grid, double lambda, double tol, int* iterations) {
    if (!polar_kind(*grid)) throw Error("solve_semilinear: needs a polar grid");
    if (lambda < 0) throw Error("solve_semilinear: lambda must be nonnegative");
    ScalarField2D base = oval_base_stream(grid);
    if (iterations) *iterations = 0;
    if (lambda == 0.0) return base;

    // Accumulate the geometric series of increments: delta_1 = l*inv(L)base,
    // delta_{n+1} = l*inv(L)delta_n. Solving for increments rather than full
    // iterates keeps the solver's relative accuracy scaling down with the
    // increment, so tight tolerances stay reachable.
    const auto problem = EllipticProblem::dirichlet(grid);
    ScalarField2D tilde(grid, 0.0);
    ScalarField2D delta = base;
    double prev_inc = -1.0;
    const int max_iter = 200;
    for (int it = 1; it <= max_iter; ++it) {
        delta = solve_dirichlet(problem, delta);
        delta *= lambda;
        tilde += delta;
        const double inc = delta.linf();
        if (iterations) *iterations = it;
        if (inc <= tol) {
            tilde += base;
            return tilde;
        }
        if (prev_inc >= 0.0 && inc >= prev_inc)
            throw NonContraction("solve_semilinear: increment ratio " +
                                 std::to_string(inc / prev_inc) + " at iteration " +
                                 std::to_string(it));
        prev_inc = inc;
    }
    throw IterationStall("solve_semilinear: no convergence in " + std::to_string(max_iter) +
                         " iterations");
}

} // namespace ef
