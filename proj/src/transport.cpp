#include "ef/transport.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ef/ops.hpp"
#include "ef/oval_map.hpp"

namespace ef {

namespace {

bool polar_kind(const Grid2D& g) {
    return g.kind() == GridKind::DiskPolar || g.kind() == GridKind::OvalMapped;
}

/// Physical point -> integration-frame point (unit-disk Cartesian for polar
/// grids, raw coordinates otherwise). Disk grids carry the identity map.
Vec2 phys_to_c(const Grid2D& g, Vec2 p) {
    if (g.kind() == GridKind::OvalMapped) {
        const cplx z = g.map()->inverse(cplx(p.x, p.y));
        return {z.real(), z.imag()};
    }
    return p;
}

Vec2 c_to_phys(const Grid2D& g, Vec2 c) {
    if (g.kind() == GridKind::OvalMapped) {
        const cplx w = g.map()->forward(cplx(c.x, c.y));
        return {w.real(), w.imag()};
    }
    return c;
}

/// Hamiltonian velocity in the integration frame; physical time is kept, so
/// the conformal factor divides the rotated gradient.
Vec2 velocity(const FieldSampler& H, Vec2 c) {
    const Vec2 g = H.grad_c(c);
    const double d = H.conformal_c(c);
    return {-g.y / d, g.x / d};
}

struct StepNode {
    double t;
    Vec2 z;
    Vec2 v;
};

Vec2 hermite(const StepNode& a, const StepNode& b, double t) {
    const double h = b.t - a.t;
    const double th = (t - a.t) / h;
    const double h00 = (1 + 2 * th) * (1 - th) * (1 - th);
    const double h10 = th * (1 - th) * (1 - th);
    const double h01 = th * th * (3 - 2 * th);
    const double h11 = th * th * (th - 1);
    return a.z * h00 + a.v * (h * h10) + b.z * h01 + b.v * (h * h11);
}

double domain_scale(const Grid2D& g) {
    if (polar_kind(g)) return 1.0;
    return 0.5 * std::max(g.hi().x - g.lo().x, g.hi().y - g.lo().y);
}

bool leaves_domain(const Grid2D& g, Vec2 c) {
    if (polar_kind(g)) return c.norm() > 1.0 - 1e-9;
    if (g.kind() == GridKind::Torus) return false;
    return c.x < g.lo().x || c.x > g.hi().x || c.y < g.lo().y || c.y > g.hi().y;
}

Orbit trace_impl(const FieldSampler& H, Vec2 x0, const TraceOptions& opt) {
    const Grid2D& g = *H.grid();
    const Vec2 z0 = phys_to_c(g, x0);
    const double level = H.value_c(z0);

    const Vec2 v0 = velocity(H, z0);
    const double speed0 = v0.norm();
    const double grad0 = H.grad_c(z0).norm();
    if (!(speed0 > 0.0) || !(grad0 > 1e-12))
        throw CriticalPointProximity("trace_orbit: seed has vanishing gradient");
    const Vec2 n0 = v0 * (1.0 / speed0); // section coordinate direction

    // Dormand-Prince 5(4) tableau (autonomous field, stage times unused).
    static const double a21 = 1.0 / 5;
    static const double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static const double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static const double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                        a54 = -212.0 / 729;
    static const double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                        a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    static const double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                        b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    static const double e1 = 35.0 / 384 - 5179.0 / 57600, e3 = 500.0 / 1113 - 7571.0 / 16695,
                        e4 = 125.0 / 192 - 393.0 / 640, e5 = -2187.0 / 6784 + 92097.0 / 339200,
                        e6 = 11.0 / 84 - 187.0 / 2100, e7 = -1.0 / 40;

    const double rk_tol = std::min(opt.rk_tol, opt.tol * 1e-2);
    const double scale = domain_scale(g);

    std::vector<StepNode> nodes;
    nodes.push_back({0.0, z0, v0});
    double t = 0.0;
    Vec2 z = z0;
    double h = std::min(opt.max_step, 1e-2 * scale / speed0);
    double h_here = level;
    double s_prev = 0.0;
    double gmax_seen = grad0;
    double T = -1.0;

    while (t < opt.t_max) {
        const Vec2 k1 = velocity(H, z);
        const Vec2 k2 = velocity(H, z + k1 * (a21 * h));
        const Vec2 k3 = velocity(H, z + k1 * (a31 * h) + k2 * (a32 * h));
        const Vec2 k4 = velocity(H, z + k1 * (a41 * h) + k2 * (a42 * h) + k3 * (a43 * h));
        const Vec2 k5 = velocity(H, z + k1 * (a51 * h) + k2 * (a52 * h) + k3 * (a53 * h) +
                                        k4 * (a54 * h));
        const Vec2 k6 = velocity(H, z + k1 * (a61 * h) + k2 * (a62 * h) + k3 * (a63 * h) +
                                        k4 * (a64 * h) + k5 * (a65 * h));
        const Vec2 znew =
            z + (k1 * b1 + k3 * b3 + k4 * b4 + k5 * b5 + k6 * b6) * h;
        const Vec2 k7 = velocity(H, znew);
        const Vec2 errv =
            (k1 * e1 + k3 * e3 + k4 * e4 + k5 * e5 + k6 * e6 + k7 * e7) * h;
        const double tol_here = rk_tol * std::max(scale, z.norm());
        double err = errv.norm() / tol_here;
        // Dense-output fidelity: the cubic Hermite segment between step ends
        // is what the resampled orbit reports, so its deviation off the level
        // must stay inside the drift budget as well. Comparing against the
        // endpoint average isolates the segment error from drift already
        // accumulated along the trajectory.
        const StepNode trial_a{t, z, k1}, trial_b{t + h, znew, k7};
        const double h_new = H.value_c(znew);
        const double mid_drift = std::abs(H.value_c(hermite(trial_a, trial_b, t + 0.5 * h)) -
                                          0.5 * (h_here + h_new));
        err = std::max(err, mid_drift / (0.25 * opt.tol));
        if (err > 1.0) {
            h = std::max(1e-13, h * std::max(0.2, 0.9 * std::pow(err, -0.2)));
            if (h <= 1e-12)
                throw NonClosingOrbit("trace_orbit: integrator step collapsed");
            continue;
        }
        t += h;
        // Manifold projection: pull the accepted point back onto the level
        // set, so integration error cannot accumulate as Hamiltonian drift
        // (the tangential component, which carries the period, is untouched).
        const Vec2 gvec = H.grad_c(znew);
        const double gn2 = gvec.dot(gvec);
        if (gn2 > 0.0) {
            z = znew + gvec * ((level - h_new) / gn2);
            h_here = H.value_c(z);
        } else {
            z = znew;
            h_here = h_new;
        }
        nodes.push_back({t, z, k7});
        if (leaves_domain(g, z)) throw OutsideDomain("trace_orbit: orbit left the domain");
        const double gnorm = std::sqrt(gn2);
        gmax_seen = std::max(gmax_seen, gnorm);
        if (gnorm < opt.critical_fraction * gmax_seen)
            throw CriticalPointProximity("trace_orbit: gradient dipped below " +
                                         std::to_string(opt.critical_fraction) +
                                         " of its orbit maximum");

        // Poincare section: upward crossing of the line through the seed
        // orthogonal to the initial flow direction, accepted near the seed.
        const double s_now = n0.dot(z - z0);
        if (nodes.size() > 3 && s_prev < 0.0 && s_now >= 0.0) {
            const StepNode& a = nodes[nodes.size() - 2];
            const StepNode& b = nodes.back();
            double tl = a.t, tr = b.t;
            for (int it = 0; it < 60; ++it) {
                const double tm = 0.5 * (tl + tr);
                (n0.dot(hermite(a, b, tm) - z0) < 0.0 ? tl : tr) = tm;
            }
            const double tc = 0.5 * (tl + tr);
            const Vec2 zc = hermite(a, b, tc);
            if ((zc - z0).norm() <= opt.closure_radius) {
                T = tc;
                break;
            }
        }
        s_prev = s_now;
        h = std::min(opt.max_step, h * std::min(5.0, 0.9 * std::pow(std::max(err, 1e-10), -0.2)));
    }
    if (T <= 0.0) throw NonClosingOrbit("trace_orbit: no closure before t_max");

    Orbit orbit;
    orbit.seed = x0;
    orbit.level = level;
    orbit.T = T;
    const int M = opt.resamples;
    orbit.samples.resize(M);
    orbit.csamples.resize(M);
    std::size_t ptr = 0;
    double drift = 0.0;
    for (int k = 0; k < M; ++k) {
        const double tk = T * k / M;
        while (ptr + 2 < nodes.size() && nodes[ptr + 1].t < tk) ++ptr;
        const Vec2 zk = k == 0 ? z0 : hermite(nodes[ptr], nodes[ptr + 1], tk);
        orbit.csamples[k] = zk;
        orbit.samples[k] = c_to_phys(g, zk);
        drift = std::max(drift, std::abs(H.value_c(zk) - level));
    }
    orbit.h_drift = drift;
    if (drift > opt.tol)
        throw NonClosingOrbit("trace_orbit: Hamiltonian drift " + std::to_string(drift) +
                              " exceeds tolerance");
    return orbit;
}

} // namespace

Orbit trace_orbit(const FieldSampler& H, Vec2 x0, const TraceOptions& opt) {
    return trace_impl(H, x0, opt);
}

Orbit trace_orbit(const ScalarField2D& H, Vec2 x0, const TraceOptions& opt) {
    return trace_impl(FieldSampler(H), x0, opt);
}

// ---------------------------------------------------------------------------
// Periods

double period_coarea(const ScalarField2D& H, const LevelComponent& component) {
    const FieldSampler sampler(H);
    const auto& pts = component.points;
    if (pts.size() < 3) throw Error("period_coarea: degenerate component");
    std::vector<double> glen(pts.size());
    double gmax = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const Vec2 a = pts[i], b = pts[(i + 1) % pts.size()];
        glen[i] = sampler.grad_phys((a + b) * 0.5).norm();
        gmax = std::max(gmax, glen[i]);
    }
    double T = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        if (glen[i] < 1e-3 * gmax)
            throw NearCriticalLevel("period_coarea: gradient vanishes on the component");
        T += (pts[(i + 1) % pts.size()] - pts[i]).norm() / glen[i];
    }
    return T;
}

double period_stokes(const ScalarField2D& H, const LevelComponent& component,
                     const std::vector<LevelComponent>& inner_boundaries) {
    const Grid2D& g = *H.grid();
    const FieldSampler sampler(H);
    const VectorField2D grad = ops::gradient(H);
    double gmax = 0.0;
    for (std::size_t k = 0; k < g.size(); ++k) gmax = std::max(gmax, grad.at(k).norm());
    const double floor = 1e-3 * gmax;

    // Field grad H / |grad H|^2 at nodes, zeroed at near-critical nodes
    // (legal only outside the integration region, which is verified below).
    VectorField2D F(H.grid());
    for (std::size_t k = 0; k < g.size(); ++k) {
        const Vec2 gr = grad.at(k);
        const double n2 = gr.dot(gr);
        if (n2 > floor * floor) F.set(k, gr * (1.0 / n2));
    }
    const ScalarField2D divF = ops::divergence(F);

    const auto inside_region = [&](Vec2 p) {
        if (!point_in_polygon(component.points, p)) return false;
        for (const auto& hole : inner_boundaries)
            if (point_in_polygon(hole.points, p)) return false;
        return true;
    };

    // Minimum |grad H| along the region boundary curves: a node gradient far
    // below it means the region swallowed a critical point (whose exact
    // location need not coincide with any node).
    double boundary_min = 1e300;
    const auto scan_curve = [&](const LevelComponent& c) {
        for (const Vec2& p : c.points)
            boundary_min = std::min(boundary_min, sampler.grad_phys(p).norm());
    };
    scan_curve(component);
    for (const auto& hole : inner_boundaries) scan_curve(hole);

    double area_term = 0.0;
    for (std::size_t k = 0; k < g.size(); ++k) {
        if (g.is_boundary(k)) continue;
        const Vec2 p = g.pos(k);
        if (!inside_region(p)) continue;
        if (grad.at(k).norm() < std::max(floor, 0.1 * boundary_min))
            throw CriticalPointInRegion("period_stokes: near-critical node inside the region");
        area_term += g.weight(k) * divF[k];
    }

    double flux = 0.0;
    for (const auto& hole : inner_boundaries) {
        const auto& pts = hole.points;
        for (std::size_t i = 0; i < pts.size(); ++i) {
            const Vec2 a = pts[i], b = pts[(i + 1) % pts.size()];
            const Vec2 mid = (a + b) * 0.5;
            const Vec2 gr = sampler.grad_phys(mid);
            const double n2 = gr.dot(gr);
            if (n2 < floor * floor)
                throw CriticalPointInRegion("period_stokes: near-critical inner boundary");
            const Vec2 d = b - a;
            flux += gr.dot(Vec2{d.y, -d.x}) / n2; // outward normal of a CCW loop
        }
    }
    // The signed result flips with the outward orientation of grad H; the
    // period itself is positive.
    return std::abs(flux + area_term);
}

// ---------------------------------------------------------------------------
// Orbit means and tubes

double orbit_mean(const FieldSampler& g, const Orbit& orbit) {
    if (orbit.csamples.empty()) throw Error("orbit_mean: empty orbit");
    double s = 0.0;
    for (const Vec2& z : orbit.csamples) s += g.value_c(z);
    return s / orbit.csamples.size();
}

double orbit_mean(const ScalarField2D& g, const Orbit& orbit) {
    return orbit_mean(FieldSampler(g), orbit);
}

namespace {

Vec2 polygon_centroid(const std::vector<Vec2>& pts) {
    Vec2 c{0, 0};
    for (const Vec2& p : pts) c = c + p;
    return c * (1.0 / pts.size());
}

/// Gradient-flow walk to the target level; throws on blowup (the walk runs
/// through a critical point).
Vec2 walk_to_level(const FieldSampler& H, Vec2 z, double target, double scale) {
    for (int it = 0; it < 60; ++it) {
        const double v = H.value_c(z);
        if (std::abs(v - target) <= 1e-13 * std::max(1.0, std::abs(target))) return z;
        const Vec2 gr = H.grad_c(z);
        const double n2 = gr.dot(gr);
        if (!(n2 > 0.0))
            throw BandContainsCriticalValue("regular_tube: level walk hit a critical point");
        Vec2 step = gr * ((target - v) / n2);
        const double len = step.norm();
        if (len > 0.3 * scale)
            throw BandContainsCriticalValue("regular_tube: level walk step blew up");
        z = z + step;
    }
    throw BandContainsCriticalValue("regular_tube: level walk failed to converge");
}

} // namespace

std::vector<Orbit> regular_tube(const ScalarField2D& H, Vec2 seed, double half_width,
                                int n_levels, const TraceOptions& opt) {
    if (n_levels < 2) throw Error("regular_tube: need at least two levels");
    if (!(half_width > 0)) throw Error("regular_tube: half_width must be positive");
    const Grid2D& g = *H.grid();
    const FieldSampler sampler(H);
    const double scale = domain_scale(g);
    const Vec2 z_seed = phys_to_c(g, seed);
    const double h0 = sampler.value_c(z_seed);

    std::vector<double> levels(n_levels);
    for (int i = 0; i < n_levels; ++i)
        levels[i] = h0 - half_width + 2.0 * half_width * i / (n_levels - 1);

    const auto trace_level = [&](Vec2 from, double level) {
        const Vec2 z = walk_to_level(sampler, from, level, scale);
        try {
            return trace_impl(sampler, c_to_phys(g, z), opt);
        } catch (const CriticalPointProximity& e) {
            throw BandContainsCriticalValue(std::string("regular_tube: ") + e.what());
        } catch (const NonClosingOrbit& e) {
            throw BandContainsCriticalValue(std::string("regular_tube: ") + e.what());
        } catch (const OutsideDomain& e) {
            throw BandContainsCriticalValue(std::string("regular_tube: ") + e.what());
        }
    };

    // Walk outward from the seed level in both directions so each level walk
    // starts from the adjacent orbit.
    std::vector<Orbit> orbits(n_levels);
    int start = 0;
    for (int i = 1; i < n_levels; ++i)
        if (std::abs(levels[i] - h0) < std::abs(levels[start] - h0)) start = i;
    orbits[start] = trace_level(z_seed, levels[start]);
    for (int i = start + 1; i < n_levels; ++i)
        orbits[i] = trace_level(orbits[i - 1].csamples[0], levels[i]);
    for (int i = start - 1; i >= 0; --i)
        orbits[i] = trace_level(orbits[i + 1].csamples[0], levels[i]);

    // Family coherence: enclosed areas and centroids must evolve gradually;
    // jumps signal a separatrix crossing inside the band.
    const double cell = scale * 25.0 / std::max(g.nx(), g.ny());
    for (int i = 0; i + 1 < n_levels; ++i) {
        const double a0 = std::abs(polygon_signed_area(orbits[i].csamples));
        const double a1 = std::abs(polygon_signed_area(orbits[i + 1].csamples));
        const double amin = std::min(a0, a1), amax = std::max(a0, a1);
        if (amin > cell * cell && amax / amin > 1.5)
            throw BandContainsCriticalValue("regular_tube: enclosed area jumped between levels");
        const Vec2 c0 = polygon_centroid(orbits[i].csamples);
        const Vec2 c1 = polygon_centroid(orbits[i + 1].csamples);
        if ((c1 - c0).norm() > 0.5 * std::sqrt(amax) + 1e-12)
            throw BandContainsCriticalValue("regular_tube: orbit family jumped components");
    }
    return orbits;
}

// ---------------------------------------------------------------------------
// Transport right-inverse

namespace {

/// Continuous sample coordinate (in [0, M)) of the polyline point nearest to
/// z, found by coarse-stride search plus local segment projection.
double nearest_phase(const std::vector<Vec2>& pts, Vec2 z) {
    const int M = static_cast<int>(pts.size());
    const int stride = std::max(1, M / 128);
    int best = 0;
    double bestd = 1e300;
    for (int k = 0; k < M; k += stride) {
        const double d = (pts[k] - z).dot(pts[k] - z);
        if (d < bestd) {
            bestd = d;
            best = k;
        }
    }
    int bk = best;
    for (int k = best - stride; k <= best + stride; ++k) {
        const int kk = ((k % M) + M) % M;
        const double d = (pts[kk] - z).dot(pts[kk] - z);
        if (d < bestd) {
            bestd = d;
            bk = kk;
        }
    }
    // Project onto the two segments adjacent to the best sample.
    double best_phase = bk;
    bestd = 1e300;
    for (int off = -1; off <= 0; ++off) {
        const int i0 = ((bk + off) % M + M) % M;
        const int i1 = (i0 + 1) % M;
        const Vec2 a = pts[i0], d = pts[i1] - a;
        const double dd = d.dot(d);
        const double u = dd > 0 ? std::clamp((z - a).dot(d) / dd, 0.0, 1.0) : 0.0;
        const Vec2 p = a + d * u;
        const double dist = (p - z).dot(p - z);
        if (dist < bestd) {
            bestd = dist;
            best_phase = i0 + u;
        }
    }
    return best_phase;
}

/// Periodic Catmull-Rom evaluation of tabulated values at a fractional index.
double periodic_catmull(const std::vector<double>& s, double phase) {
    const int M = static_cast<int>(s.size());
    const int i = static_cast<int>(std::floor(phase));
    const double t = phase - i;
    const auto at = [&](int k) { return s[((k % M) + M) % M]; };
    const double p0 = at(i - 1), p1 = at(i), p2 = at(i + 1), p3 = at(i + 2);
    const double w0 = 0.5 * (-t * t * t + 2 * t * t - t);
    const double w1 = 0.5 * (3 * t * t * t - 5 * t * t + 2);
    const double w2 = 0.5 * (-3 * t * t * t + 4 * t * t + t);
    const double w3 = 0.5 * (t * t * t - t * t);
    return w0 * p0 + w1 * p1 + w2 * p2 + w3 * p3;
}

double lagrange_level(const double* x, const double* y, int n, double h) {
    double out = 0.0;
    for (int i = 0; i < n; ++i) {
        double w = y[i];
        for (int j = 0; j < n; ++j)
            if (j != i) w *= (h - x[j]) / (x[i] - x[j]);
        out += w;
    }
    return out;
}

} // namespace

ScalarField2D transport_right_inverse(const ScalarField2D& H, const ScalarField2D& g,
                                      const std::vector<Orbit>& family, double mean_tol_rel) {
    const Grid2D& grid = *H.grid();
    check_same_grid(H, g, "transport_right_inverse");
    if (family.size() < 2) throw Error("transport_right_inverse: need at least two orbits");

    ScalarField2D f(H.grid(), 0.0);
    const double gmax_val = g.linf();
    if (gmax_val == 0.0) return f;

    // Support regularity: every node carrying g must be a regular point.
    const VectorField2D gradH = ops::gradient(H);
    double gradmax = 0.0;
    for (std::size_t k = 0; k < grid.size(); ++k)
        gradmax = std::max(gradmax, gradH.at(k).norm());
    for (std::size_t k = 0; k < grid.size(); ++k)
        if (std::abs(g[k]) > 1e-14 * gmax_val && gradH.at(k).norm() < 1e-3 * gradmax)
            throw CriticalSupport("transport_right_inverse: source supported at a "
                                  "near-critical node");

    // Orbits sorted by level; per-orbit primitives of g in physical time,
    // closed by detrending the one-loop defect and normalized to zero mean.
    std::vector<int> order(family.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return family[a].level < family[b].level; });

    const FieldSampler gs(g);
    const int n_orb = static_cast<int>(family.size());
    std::vector<std::vector<double>> prim(n_orb);
    std::vector<double> levels(n_orb);
    for (int oi = 0; oi < n_orb; ++oi) {
        const Orbit& orb = family[order[oi]];
        levels[oi] = orb.level;
        const int M = static_cast<int>(orb.csamples.size());
        if (M < 8) throw Error("transport_right_inverse: orbit has too few samples");
        std::vector<double> gv(M);
        for (int k = 0; k < M; ++k) gv[k] = gs.value_c(orb.csamples[k]);
        const double dt = orb.T / M;
        std::vector<double> s(M + 1, 0.0);
        for (int k = 0; k < M; ++k)
            s[k + 1] = s[k] + 0.5 * dt * (gv[k] + gv[(k + 1) % M]);
        const double defect = s[M];
        if (std::abs(defect / orb.T) > mean_tol_rel * gmax_val)
            throw NotInRange("transport_right_inverse: orbit mean " +
                             std::to_string(defect / orb.T) + " at level " +
                             std::to_string(orb.level) + " exceeds tolerance");
        double mean = 0.0;
        for (int k = 0; k < M; ++k) {
            s[k] -= defect * k / M;
            mean += s[k];
        }
        mean /= M;
        s.resize(M);
        for (double& v : s) v -= mean;
        prim[oi] = std::move(s);
    }
    for (int oi = 0; oi + 1 < n_orb; ++oi)
        if (!(levels[oi + 1] > levels[oi]))
            throw Error("transport_right_inverse: orbit levels must be distinct");

    // Tube membership: level inside the family range and position inside the
    // outermost loop (levels alone would also capture the other lobes).
    int outer = 0;
    double amax = -1.0;
    for (int oi = 0; oi < n_orb; ++oi) {
        const double a = std::abs(polygon_signed_area(family[order[oi]].csamples));
        if (a > amax) {
            amax = a;
            outer = oi;
        }
    }
    const std::vector<Vec2>& outer_loop = family[order[outer]].csamples;
    const double lo = levels.front(), hi = levels.back();

    par::for_each(static_cast<std::int64_t>(grid.size()), [&](std::int64_t k) {
        if (grid.is_boundary(k)) return;
        const double h = H[k];
        if (h < lo || h > hi) return;
        Vec2 zc;
        if (polar_kind(grid)) {
            const Vec2 comp = grid.comp(k);
            zc = Vec2{comp.y * std::cos(comp.x), comp.y * std::sin(comp.x)};
        } else {
            zc = grid.pos(k);
        }
        if (!point_in_polygon(outer_loop, zc)) return;

        // Bracketing orbits by level.
        int idx = static_cast<int>(std::upper_bound(levels.begin(), levels.end(), h) -
                                   levels.begin()) -
                  1;
        idx = std::clamp(idx, 0, n_orb - 2);
        int first = std::clamp(idx - 1, 0, n_orb - 4);
        int count = 4;
        if (n_orb < 4) {
            first = idx;
            count = 2;
        }
        double xs[4], ys[4];
        for (int m = 0; m < count; ++m) {
            const int oi = first + m;
            const Orbit& orb = family[order[oi]];
            const double phase = nearest_phase(orb.csamples, zc);
            xs[m] = levels[oi];
            ys[m] = periodic_catmull(prim[oi], phase);
        }
        f[k] = lagrange_level(xs, ys, count, h);
    });
    return f;
}

} // namespace ef
