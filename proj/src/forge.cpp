#include "ef/forge.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "ef/common.hpp"
#include "ef/contour.hpp"
#include "ef/elliptic.hpp"
#include "ef/interp.hpp"
#include "ef/ops.hpp"

namespace ef {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool polar_kind(const Grid2D& g) {
    return g.kind() == GridKind::DiskPolar || g.kind() == GridKind::OvalMapped;
}

Vec2 node_frame_position(const Grid2D& g, std::size_t k) {
    if (polar_kind(g)) {
        const Vec2 c = g.comp(k);
        return Vec2{c.y * std::cos(c.x), c.y * std::sin(c.x)};
    }
    return g.pos(k);
}

/// Connected components (4-neighbor, periodic directions wrapped) of the
/// node set carrying values above the threshold.
std::vector<std::vector<std::size_t>> support_clusters(const ScalarField2D& f, double thr) {
    const Grid2D& g = *f.grid();
    const int nx = g.nx(), ny = g.ny();
    const bool wrap_i = g.kind() != GridKind::Cartesian;
    const bool wrap_j = g.kind() == GridKind::Torus;
    std::vector<char> seen(g.size(), 0);
    std::vector<std::vector<std::size_t>> clusters;
    std::vector<std::size_t> stack;
    for (std::size_t start = 0; start < g.size(); ++start) {
        if (seen[start] || std::abs(f[start]) <= thr) continue;
        clusters.emplace_back();
        stack.assign(1, start);
        seen[start] = 1;
        while (!stack.empty()) {
            const std::size_t k = stack.back();
            stack.pop_back();
            clusters.back().push_back(k);
            const int i = static_cast<int>(k) % nx;
            const int j = static_cast<int>(k) / nx;
            const auto visit = [&](int ii, int jj) {
                if (wrap_i) ii = (ii + nx) % nx;
                if (wrap_j) jj = (jj + ny) % ny;
                if (ii < 0 || ii >= nx || jj < 0 || jj >= ny) return;
                const std::size_t kk = static_cast<std::size_t>(jj) * nx + ii;
                if (seen[kk] || std::abs(f[kk]) <= thr) return;
                seen[kk] = 1;
                stack.push_back(kk);
            };
            visit(i - 1, j);
            visit(i + 1, j);
            visit(i, j - 1);
            visit(i, j + 1);
        }
    }
    return clusters;
}

struct Band {
    std::vector<std::size_t> nodes;
    double lo = kInf, hi = -kInf;
};

/// Clusters of the source support with their level ranges under H; clusters
/// whose ranges overlap are merged (they sit on one orbit component and were
/// split only by sign changes of the source).
std::vector<Band> support_bands(const ScalarField2D& H, const ScalarField2D& rhs) {
    const double thr = 1e-14 * rhs.linf();
    auto clusters = support_clusters(rhs, thr);
    std::vector<Band> bands;
    for (auto& c : clusters) {
        Band b;
        b.nodes = std::move(c);
        for (std::size_t k : b.nodes) {
            b.lo = std::min(b.lo, H[k]);
            b.hi = std::max(b.hi, H[k]);
        }
        bands.push_back(std::move(b));
    }
    bool merged = true;
    while (merged) {
        merged = false;
        for (std::size_t a = 0; a < bands.size() && !merged; ++a) {
            for (std::size_t b = a + 1; b < bands.size() && !merged; ++b) {
                if (bands[a].lo <= bands[b].hi && bands[b].lo <= bands[a].hi) {
                    bands[a].nodes.insert(bands[a].nodes.end(), bands[b].nodes.begin(),
                                          bands[b].nodes.end());
                    bands[a].lo = std::min(bands[a].lo, bands[b].lo);
                    bands[a].hi = std::max(bands[a].hi, bands[b].hi);
                    bands.erase(bands.begin() + b);
                    merged = true;
                }
            }
        }
    }
    if (bands.size() > 6)
        throw Error("remainder source fragments into " + std::to_string(bands.size()) +
                    " level bands; expected a few connected components");
    return bands;
}

/// Transport right-inverse of rhs along orbits of H, one orbit family per
/// support band. Outputs of distinct bands have disjoint supports.
ScalarField2D right_inverse_by_bands(const ScalarField2D& H, const ScalarField2D& rhs,
                                     double mean_tol_rel, int* families_out) {
    ScalarField2D f(H.grid(), 0.0);
    if (rhs.linf() == 0.0) {
        if (families_out) *families_out = 0;
        return f;
    }
    const Grid2D& g = *H.grid();
    const auto bands = support_bands(H, rhs);
    if (families_out) *families_out = static_cast<int>(bands.size());
    for (const Band& band : bands) {
        const double mid = 0.5 * (band.lo + band.hi);
        const double w = 0.55 * (band.hi - band.lo);
        if (!(w > 0.0))
            throw Error("remainder source support is level-degenerate; cannot span a band");
        std::size_t seed = band.nodes.front();
        double best = kInf;
        for (std::size_t k : band.nodes) {
            const double d = std::abs(H[k] - mid);
            if (d < best) {
                best = d;
                seed = k;
            }
        }
        // The band edges carry only stencil tails of the source, and nodes
        // outside the family's level span are written as zero anyway, so when
        // the widest tube grazes a critical level we retry slightly narrower
        // instead of failing the whole iteration.
        std::vector<Orbit> family;
        double wt = w;
        for (int attempt = 0;; ++attempt) {
            try {
                family = regular_tube(H, g.pos(seed), wt, 33);
                break;
            } catch (const BandContainsCriticalValue&) {
                if (attempt >= 6) throw;
                wt *= 0.85;
            }
        }
        const ScalarField2D part = transport_right_inverse(H, rhs, family, mean_tol_rel);
        f += part;
    }
    return f;
}

/// psi0 + e psi1 + e^2 psi2.
ScalarField2D compose_state(const ScalarField2D& psi0, const ScalarField2D& psi1,
                            const ScalarField2D& psi2, double e) {
    ScalarField2D out = psi0;
    ScalarField2D t = psi1;
    t *= e;
    out += t;
    t = psi2;
    t *= e * e;
    out += t;
    return out;
}

} // namespace

BumpForcing build_bump_forcing(const ScalarField2D& psi0, const MorseReport& morse,
                               double eps0, const Profile& bump_template) {
    if (morse.points.size() < 2)
        throw NoSaddle("bump forcing needs a base state with multiple critical points");
    const CriticalPoint* saddle = nullptr;
    for (const auto& p : morse.points)
        if (p.kind == CriticalKind::Saddle) {
            saddle = &p;
            break;
        }
    if (!saddle) throw NoSaddle("bump forcing: base state has no saddle point");

    // Companion extremum: nearest to the saddle; ties broken toward positive
    // coordinates for determinism.
    const CriticalPoint* ext = nullptr;
    double best = kInf;
    for (const auto& p : morse.points) {
        if (p.kind != CriticalKind::Minimum && p.kind != CriticalKind::Maximum) continue;
        const double d = (p.location - saddle->location).norm();
        if (d < best - 1e-12 ||
            (d < best + 1e-12 && ext &&
             (p.location.x > ext->location.x + 1e-12 ||
              (std::abs(p.location.x - ext->location.x) <= 1e-12 &&
               p.location.y > ext->location.y)))) {
            best = d;
            ext = &p;
        }
    }
    if (!ext) throw NoSaddle("bump forcing: no extremum to pair with the saddle");

    const double gap = std::abs(saddle->value - ext->value);
    if (!(gap > 0.0)) throw Error("bump forcing: saddle and extremum share a value");
    if (eps0 <= 0.0) eps0 = 0.25 * gap;
    if (eps0 >= 0.5 * gap)
        throw BandContainsCriticalValue("bump band of half width " + std::to_string(eps0) +
                                        " reaches a critical value (gap " +
                                        std::to_string(gap) + ")");
    const double level0 = 0.5 * (saddle->value + ext->value);

    // Base point: the level0 crossing on the segment extremum -> saddle.
    const FieldSampler ps(psi0);
    Vec2 a = ext->location, b = saddle->location;
    double fa = ps.value_phys(a) - level0;
    double fb = ps.value_phys(b) - level0;
    if (fa * fb > 0.0) throw Error("bump forcing: level not bracketed between critical points");
    for (int it = 0; it < 100; ++it) {
        const Vec2 m = (a + b) * 0.5;
        const double fm = ps.value_phys(m) - level0;
        if (fa * fm <= 0.0) {
            b = m;
            fb = fm;
        } else {
            a = m;
            fa = fm;
        }
    }
    const Vec2 x0 = (a + b) * 0.5;

    // Orbit family across a slightly widened band (certifies regularity and
    // provides the component mask).
    const double widen = std::min(0.05 * eps0, 0.45 * (0.5 * gap - eps0));
    const auto tube = regular_tube(psi0, x0, eps0 + widen, 33);

    int outer = 0;
    double amax = -1.0;
    for (std::size_t i = 0; i < tube.size(); ++i) {
        const double area = std::abs(polygon_signed_area(tube[i].csamples));
        if (area > amax) {
            amax = area;
            outer = static_cast<int>(i);
        }
    }
    const std::vector<Vec2>& mask = tube[outer].csamples;

    Profile G = bump_template.rescaled(level0, eps0);
    const Grid2D& grid = *psi0.grid();
    ScalarField2D eta(psi0.grid(), 0.0);
    for (std::size_t k = 0; k < grid.size(); ++k) {
        if (std::abs(psi0[k] - level0) >= eps0) continue;
        if (!point_in_polygon(mask, node_frame_position(grid, k))) continue;
        eta[k] = G(psi0[k]);
    }
    const double m = eta.linf();
    if (m == 0.0) throw Error("bump band is unresolved by the grid");
    eta *= 1.0 / m;
    G = G.scaled(1.0 / m);

    BumpForcing out;
    out.eta = std::move(eta);
    out.tube = tube;
    out.x0 = x0;
    out.level0 = level0;
    out.eps0 = eps0;
    out.G = G;
    return out;
}

ScalarField2D first_order(const ScalarField2D& psi0, const ScalarField2D& Fprime_at_psi0,
                          const ScalarField2D& eta) {
    check_same_grid(psi0, Fprime_at_psi0, "first_order");
    check_same_grid(psi0, eta, "first_order");
    const GridPtr& gp = psi0.grid();
    if (gp->kind() == GridKind::Torus) {
        double dev = 0.0;
        for (std::size_t k = 0; k < gp->size(); ++k)
            dev = std::max(dev, std::abs(Fprime_at_psi0[k] + 2.0));
        if (dev > 1e-10)
            throw Error("first_order on the torus supports the cellular operator (F' = -2)");
        const ScalarField2D leak = kernel_projection(eta);
        const double ref = eta.l2();
        if (ref > 0.0 && leak.l2() > 1e-10 * ref)
            throw KernelLeak("first_order: forcing has a kernel component of relative size " +
                             std::to_string(leak.l2() / ref));
        return torus_helmholtz_solve(eta);
    }
    return solve_dirichlet(EllipticProblem::dirichlet(gp, Fprime_at_psi0), eta);
}

ForgeResult forge_remainder(const ScalarField2D& psi0, const ScalarField2D& psi1,
                            const ScalarField2D& eta, const Profile& F, double eps,
                            int max_iter, double tol, double mean_tol_rel) {
    check_same_grid(psi0, psi1, "forge_remainder");
    check_same_grid(psi0, eta, "forge_remainder");
    if (max_iter < 1) throw Error("forge_remainder: max_iter must be positive");
    if (!(tol > 0.0)) throw Error("forge_remainder: tolerance must be positive");
    const GridPtr& gp = psi0.grid();
    const Grid2D& grid = *gp;
    const bool torus = grid.kind() == GridKind::Torus;

    ScalarField2D Fp(gp, 0.0);
    for (std::size_t k = 0; k < grid.size(); ++k) Fp[k] = F.d1(psi0[k]);
    if (torus) {
        double dev = 0.0;
        for (std::size_t k = 0; k < grid.size(); ++k) dev = std::max(dev, std::abs(Fp[k] + 2.0));
        if (dev > 1e-10)
            throw Error("forge_remainder on the torus supports the cellular operator (F' = -2)");
    }

    bool have_fpp = !F.is_affine();
    ScalarField2D Fpp(gp, 0.0);
    if (have_fpp) {
        for (std::size_t k = 0; k < grid.size(); ++k) Fpp[k] = F.d2(psi0[k]);
        have_fpp = Fpp.linf() > 0.0;
    }

    const ScalarField2D P10 = ops::bracket(psi1, psi0);
    const ScalarField2D B1e = ops::bracket(psi1, eta);

    const auto apply_inverse = [&](const ScalarField2D& f) {
        if (torus) return torus_helmholtz_solve(f);
        return solve_dirichlet(EllipticProblem::dirichlet(gp, Fp), f);
    };

    const auto assemble_rhs = [&](const ScalarField2D& psi2, double e) {
        ScalarField2D rhs = B1e;
        rhs *= -1.0;
        if (e != 0.0) {
            ScalarField2D b2e = ops::bracket(psi2, eta);
            b2e *= -e;
            rhs += b2e;
        }
        if (have_fpp) {
            ScalarField2D P20(gp, 0.0);
            if (e != 0.0) P20 = ops::bracket(psi2, psi0);
            for (std::size_t k = 0; k < grid.size(); ++k) {
                const double quad = e * psi2[k] * P10[k] + e * e * psi2[k] * P20[k] +
                                    psi1[k] * P10[k] + e * psi1[k] * P20[k];
                rhs[k] -= Fpp[k] * quad;
            }
        }
        return rhs;
    };

    std::vector<double> trace;
    ScalarField2D psi2(gp, 0.0);
    double e = eps;
    int halvings = 0;
    int families = 0;
    bool floor_stagnation = false;

    for (;; ++halvings) {
        psi2 = ScalarField2D(gp, 0.0);
        trace.clear();
        floor_stagnation = false;
        double prev = kInf;
        bool converged = false;
        bool diverged = false;

        for (int it = 1; it <= max_iter; ++it) {
            const ScalarField2D psi_eps = compose_state(psi0, psi1, psi2, e);
            const ScalarField2D rhs = assemble_rhs(psi2, e);
            const ScalarField2D f = right_inverse_by_bands(psi_eps, rhs, mean_tol_rel, &families);
            ScalarField2D psi2_new = apply_inverse(f);

            ScalarField2D diff = psi2_new;
            diff -= psi2;
            const double d = diff.linf();
            if (!std::isfinite(d)) {
                diverged = true;
                break;
            }
            if (it >= 2 && d >= prev) {
                if (d <= 1e3 * tol) {
                    converged = true; // stalled at the numeric floor; keep the old iterate
                    floor_stagnation = true;
                    break;
                }
                diverged = true;
                break;
            }
            trace.push_back(d);
            psi2 = std::move(psi2_new);
            prev = d;
            if (e == 0.0 || d <= tol) {
                converged = true;
                break;
            }
        }

        if (converged) break;
        if (!diverged)
            throw IterationStall("forge_remainder: " + std::to_string(max_iter) +
                                 " iterations without reaching tolerance (last difference " +
                                 std::to_string(trace.empty() ? 0.0 : trace.back()) + ")");
        if (halvings >= 2)
            throw PicardDivergence("forge_remainder: non-contracting iteration after halving "
                                   "the perturbation twice (eps reached " +
                                   std::to_string(e) + ")");
        e *= 0.5;
    }

    ForgeResult out;
    out.psi0 = psi0;
    out.psi1 = psi1;
    out.psi2 = psi2;
    out.psi_eps = compose_state(psi0, psi1, psi2, e);
    out.eta = eta;
    out.eps = e;
    out.trace = trace;

    const SteadyResidual res = steady_residual(out.psi_eps);
    out.diagnostics["residual_l2"] = res.l2;
    out.diagnostics["residual_linf"] = res.linf;
    out.diagnostics["iterations"] = static_cast<double>(trace.size());
    out.diagnostics["halvings"] = static_cast<double>(halvings);
    out.diagnostics["eps_requested"] = eps;
    out.diagnostics["final_diff"] = trace.empty() ? 0.0 : trace.back();
    out.diagnostics["floor_stagnation"] = floor_stagnation ? 1.0 : 0.0;
    out.diagnostics["support_bands"] = static_cast<double>(families);
    return out;
}

ForgeResult forge_oval(const GridPtr& grid, double lambda, double eps, double eps0,
                       int max_iter, double tol, double mean_tol_rel) {
    const ScalarField2D psi0 = solve_semilinear(grid, lambda);
    const MorseReport morse = morse_classify(psi0);
    const Profile F = Profile::affine(1.0, lambda);
    const BumpForcing bf = build_bump_forcing(psi0, morse, eps0, Profile::bump(0.0, 1.0));

    ScalarField2D Fp(grid, 0.0);
    for (std::size_t k = 0; k < grid->size(); ++k) Fp[k] = F.d1(psi0[k]);
    const ScalarField2D psi1 = first_order(psi0, Fp, bf.eta);

    ForgeResult out = forge_remainder(psi0, psi1, bf.eta, F, eps, max_iter, tol, mean_tol_rel);
    out.diagnostics["level0"] = bf.level0;
    out.diagnostics["eps0"] = bf.eps0;
    out.diagnostics["x0_x"] = bf.x0.x;
    out.diagnostics["x0_y"] = bf.x0.y;
    out.diagnostics["G_at_level0"] = bf.G(bf.level0);
    out.diagnostics["lambda"] = lambda;
    return out;
}

ScalarField2D build_cellular_forcing(const GridPtr& grid, const Profile& G) {
    if (grid->kind() != GridKind::Torus)
        throw Error("cellular forcing is defined on the torus");
    if (grid->nx() % 2 != 0)
        throw Error("cellular forcing needs an even number of columns for the half-period copy");
    const auto sup = G.support();
    if (!(sup.first > 0.0 && sup.second < 1.0))
        throw Error("cellular band must sit strictly between the separatrix value 0 and the "
                    "cell extremum value 1");

    const ScalarField2D psi0 =
        sample(grid, [](double x, double y) { return std::sin(x) * std::sin(y); });
    const Grid2D& g = *grid;
    ScalarField2D eta(grid, 0.0);
    for (std::size_t k = 0; k < g.size(); ++k) {
        const Vec2 p = g.pos(k);
        if (p.x > 0.0 && p.y > 0.0) eta[k] = G(psi0[k]);
    }
    const int nx = g.nx();
    for (std::size_t k = 0; k < g.size(); ++k) {
        const Vec2 p = g.pos(k);
        if (p.x < 0.0 && p.y > 0.0) eta[k] = eta[k + static_cast<std::size_t>(nx / 2)];
    }
    return eta;
}

Profile cellular_mean_zero_bump(const GridPtr& grid, double center, double half_width) {
    if (grid->kind() != GridKind::Torus)
        throw Error("cellular bump calibration runs on the torus");
    if (!(center - half_width > 0.0 && center + half_width < 1.0))
        throw Error("cellular band must sit strictly inside (0, 1)");
    const Profile B = Profile::bump(center, half_width);
    const ScalarField2D psi0 =
        sample(grid, [](double x, double y) { return std::sin(x) * std::sin(y); });
    const Grid2D& g = *grid;
    double s1 = 0.0, s2 = 0.0;
    for (std::size_t k = 0; k < g.size(); ++k) {
        const Vec2 p = g.pos(k);
        if (!(p.x > 0.0 && p.y > 0.0)) continue;
        const double b = B(psi0[k]);
        s1 += b * g.weight(k);
        s2 += b * b * g.weight(k);
    }
    if (!(s2 > 0.0)) throw Error("cellular band misses the stream range on this grid");
    const double c = s1 / s2;
    return Profile::custom(
        [B, c](double t) {
            const double b = B(t);
            return b - c * b * b;
        },
        [B, c](double t) { return B.d1(t) * (1.0 - 2.0 * c * B(t)); },
        [B, c](double t) {
            const double b1 = B.d1(t);
            return B.d2(t) * (1.0 - 2.0 * c * B(t)) - 2.0 * c * b1 * b1;
        },
        center - half_width, center + half_width);
}

ForgeResult forge_cellular(const GridPtr& grid, double eps, const Profile& G, int max_iter,
                           double tol, double mean_tol_rel) {
    if (grid->kind() != GridKind::Torus) throw Error("forge_cellular runs on the torus");
    const ScalarField2D psi0 =
        sample(grid, [](double x, double y) { return std::sin(x) * std::sin(y); });
    const ScalarField2D eta = build_cellular_forcing(grid, G);

    const Grid2D& g = *grid;
    double mean = 0.0, mass = 0.0;
    for (std::size_t k = 0; k < g.size(); ++k) {
        mean += eta[k] * g.weight(k);
        mass += std::abs(eta[k]) * g.weight(k);
    }
    if (!(mass > 0.0)) throw Error("cellular forcing vanishes on this grid");
    if (std::abs(mean) > 1e-8 * mass)
        throw MeanViolation("cellular forcing has area integral " + std::to_string(mean) +
                            " against absolute mass " + std::to_string(mass));

    const ScalarField2D Fp(grid, -2.0);
    const ScalarField2D psi1 = first_order(psi0, Fp, eta);
    const Profile F = Profile::affine(0.0, -2.0);
    ForgeResult out = forge_remainder(psi0, psi1, eta, F, eps, max_iter, tol, mean_tol_rel);
    out.diagnostics["kernel_leak"] = kernel_projection(eta).l2();
    return out;
}

SteadyResidual steady_residual(const ScalarField2D& psi) {
    SteadyResidual out;
    out.field = ops::bracket(psi, ops::laplacian(psi));
    out.l2 = out.field.l2(2);
    out.linf = out.field.linf(2);
    return out;
}

} // namespace ef
