#include "ef/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>
#include <vector>

#include "ef/common.hpp"
#include "ef/contour.hpp"
#include "ef/elliptic.hpp"
#include "ef/interp.hpp"
#include "ef/ops.hpp"
#include "ef/oval.hpp"

namespace ef {

namespace {

double median_of(std::vector<double> v) {
    if (v.empty()) return 0.0;
    const std::size_t m = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(m), v.end());
    const double hi = v[m];
    if (v.size() % 2 == 1) return hi;
    const double lo = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(m));
    return 0.5 * (lo + hi);
}

double median_cell_area(const GridPtr& g) {
    std::vector<double> w(g->size());
    for (std::size_t k = 0; k < g->size(); ++k) w[k] = g->weight(k);
    return median_of(std::move(w));
}

bool polar_kind(const GridPtr& g) {
    return g->kind() == GridKind::DiskPolar || g->kind() == GridKind::OvalMapped;
}

/// Reciprocal Arnold ratio, extended off the retained set by the constant
/// median value; throws ArnoldViolation when the ratio is not strictly
/// positive, since the quadratic form needs a positive weight.
ScalarField2D casimir_weight(const ScalarField2D& psi0) {
    const ArnoldReport ar = arnold_ratio(psi0);
    if (ar.min <= 0.0)
        throw ArnoldViolation("casimir_weight: Arnold ratio reaches " + std::to_string(ar.min) +
                              "; the quadratic form requires a positive ratio");
    ScalarField2D w(psi0.grid());
    for (std::size_t k = 0; k < w.size(); ++k) w[k] = 1.0 / ar.ratio[k];
    return w;
}

}  // namespace

// The lattice measure dx*dy over the physical cell area is exactly the
// reciprocal metric factor, so a single division per node converts the
// average of the ++, +x and x+ lattice forms to the physical bracket.
ScalarField2D conserving_bracket(const ScalarField2D& a, const ScalarField2D& b) {
    const GridPtr& g = a.grid();
    if (!g->same_as(*b.grid())) throw Error("conserving_bracket: grid mismatch");
    const int nx = g->nx(), ny = g->ny();
    const bool polar = polar_kind(g);
    const bool torus = g->kind() == GridKind::Torus;
    // Counterclockwise polar coordinates are left-handed as a (col,row)
    // lattice, so the lattice Jacobian picks up a sign there.
    const double orient = polar ? -1.0 : 1.0;

    ScalarField2D out(g);
    const int jlo = torus ? 0 : 1;
    const int jhi = torus ? ny - 1 : ny - 2;
    const int ilo = (torus || polar) ? 0 : 1;
    const int ihi = (torus || polar) ? nx - 1 : nx - 2;
    for (int j = jlo; j <= jhi; ++j) {
        const int jn = torus ? g->wrap_row(j + 1) : j + 1;
        const int js = torus ? g->wrap_row(j - 1) : j - 1;
        for (int i = ilo; i <= ihi; ++i) {
            const int ie = g->wrap_col(i + 1);
            const int iw = g->wrap_col(i - 1);
            const double aE = a.at(j, ie), aW = a.at(j, iw);
            const double aN = a.at(jn, i), aS = a.at(js, i);
            const double aNE = a.at(jn, ie), aNW = a.at(jn, iw);
            const double aSE = a.at(js, ie), aSW = a.at(js, iw);
            const double bE = b.at(j, ie), bW = b.at(j, iw);
            const double bN = b.at(jn, i), bS = b.at(js, i);
            const double bNE = b.at(jn, ie), bNW = b.at(jn, iw);
            const double bSE = b.at(js, ie), bSW = b.at(js, iw);

            const double j1 = (aE - aW) * (bN - bS) - (aN - aS) * (bE - bW);
            const double j2 = aE * (bNE - bSE) - aW * (bNW - bSW) -
                              aN * (bNE - bNW) + aS * (bSE - bSW);
            const double j3 = aNE * (bN - bE) - aSW * (bW - bS) -
                              aNW * (bN - bW) + aSE * (bE - bS);
            const std::size_t k = g->index(j, i);
            out[k] = orient * (j1 + j2 + j3) / (12.0 * g->weight(k));
        }
    }
    return out;
}

ViolationReport semilinear_violation(const ScalarField2D& psi, const std::vector<double>& levels) {
    const GridPtr& g = psi.grid();
    const ScalarField2D omega = ops::laplacian(psi);
    const FieldSampler wsamp(omega);
    const double area_med = median_cell_area(g);

    ViolationReport rep;
    for (const double lv : levels) {
        const std::vector<LevelComponent> comps = extract_level_components(psi, lv);
        LevelProbe probe;
        probe.level = lv;
        for (const LevelComponent& c : comps) {
            const std::size_t n = c.points.size();
            double total = 0.0, first = 0.0;
            std::vector<double> vals(n), ds(n);
            for (std::size_t i = 0; i < n; ++i) {
                const Vec2& prev = c.points[(i + n - 1) % n];
                const Vec2& next = c.points[(i + 1) % n];
                const Vec2& p = c.points[i];
                ds[i] = 0.5 * (std::hypot(p.x - prev.x, p.y - prev.y) +
                               std::hypot(next.x - p.x, next.y - p.y));
                vals[i] = wsamp.value_phys(p);
                total += ds[i];
                first += vals[i] * ds[i];
            }
            const double mean = first / total;
            double second = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                second += (vals[i] - mean) * (vals[i] - mean) * ds[i];
                rep.scatter.push_back({lv, vals[i]});
            }
            probe.means.push_back(mean);
            probe.spreads.push_back(std::sqrt(second / total));
        }
        for (std::size_t a = 0; a < probe.means.size(); ++a)
            for (std::size_t b = a + 1; b < probe.means.size(); ++b)
                probe.gap = std::max(probe.gap, std::abs(probe.means[a] - probe.means[b]));
        const double spread_max =
            probe.spreads.empty() ? 0.0 : *std::max_element(probe.spreads.begin(), probe.spreads.end());
        probe.threshold = std::max(5.0 * spread_max, 10.0 * area_med);
        rep.max_gap = std::max(rep.max_gap, probe.gap);
        if (probe.means.size() >= 2 && probe.gap > probe.threshold) rep.multivalued = true;
        rep.probes.push_back(std::move(probe));
    }
    return rep;
}

CollinearityReport collinearity_check(const ScalarField2D& psi) {
    const GridPtr& g = psi.grid();
    const VectorField2D gp = ops::gradient(psi);
    const VectorField2D gw = ops::gradient(ops::laplacian(psi));

    double gmax = 0.0;
    for (std::size_t k = 0; k < g->size(); ++k)
        gmax = std::max(gmax, std::hypot(gp.x(k), gp.y(k)));
    const double cut = 3e-2 * gmax;

    CollinearityReport rep;
    rep.defect = ScalarField2D(g);
    const bool polar = polar_kind(g);
    for (std::size_t k = 0; k < g->size(); ++k) {
        if (g->boundary_distance(k) < 2) continue;
        if (polar && g->row(k) == 0) continue;
        const double px = gp.x(k), py = gp.y(k);
        const double wx = gw.x(k), wy = gw.y(k);
        const double np = std::hypot(px, py);
        if (np <= cut) continue;
        const double nw = std::hypot(wx, wy);
        const double cross = std::abs(px * wy - py * wx);
        const double d = cross / (np * nw + np * np);
        rep.defect[k] = d;
        rep.max_defect = std::max(rep.max_defect, d);
    }
    return rep;
}

ArnoldReport arnold_ratio(const ScalarField2D& psi, double collinearity_tol) {
    const GridPtr& g = psi.grid();
    const VectorField2D gp = ops::gradient(psi);
    const VectorField2D gw = ops::gradient(ops::laplacian(psi));
    const MorseReport morse = morse_classify(psi);
    const double h = std::sqrt(median_cell_area(g));

    double gmax = 0.0;
    for (std::size_t k = 0; k < g->size(); ++k)
        gmax = std::max(gmax, std::hypot(gp.x(k), gp.y(k)));
    const double cut = 3e-2 * gmax;

    ArnoldReport rep;
    rep.ratio = ScalarField2D(g);
    rep.retained = ScalarField2D(g);
    rep.min = std::numeric_limits<double>::infinity();
    rep.max = -std::numeric_limits<double>::infinity();
    double max_defect = 0.0;
    std::vector<double> kept;
    kept.reserve(g->size());
    const bool polar = polar_kind(g);
    for (std::size_t k = 0; k < g->size(); ++k) {
        if (g->boundary_distance(k) < 2) continue;
        if (polar && g->row(k) == 0) continue;
        const Vec2 p = g->pos(k);
        bool near_critical = false;
        for (const CriticalPoint& cp : morse.points)
            if (std::hypot(p.x - cp.location.x, p.y - cp.location.y) < 3.0 * h) {
                near_critical = true;
                break;
            }
        if (near_critical) continue;
        const double px = gp.x(k), py = gp.y(k);
        const double np = std::hypot(px, py);
        if (np <= cut) continue;
        const double wx = gw.x(k), wy = gw.y(k);
        const double nw = std::hypot(wx, wy);
        const double cross = std::abs(px * wy - py * wx);
        max_defect = std::max(max_defect, cross / (np * nw + np * np));
        const double r = (px * wx + py * wy) / (np * np);
        rep.ratio[k] = r;
        rep.retained[k] = 1.0;
        rep.min = std::min(rep.min, r);
        rep.max = std::max(rep.max, r);
        kept.push_back(r);
    }
    if (kept.empty()) throw CollinearityViolation("arnold_ratio: no node qualifies for the ratio");
    if (max_defect > collinearity_tol)
        throw CollinearityViolation("arnold_ratio: alignment defect " + std::to_string(max_defect) +
                                    " exceeds tolerance " + std::to_string(collinearity_tol));
    const double fill = median_of(std::move(kept));
    for (std::size_t k = 0; k < g->size(); ++k)
        if (rep.retained[k] == 0.0) rep.ratio[k] = fill;
    return rep;
}

double casimir_form(const ScalarField2D& psi0, const ScalarField2D& omega_tilde) {
    const GridPtr& g = psi0.grid();
    if (!g->same_as(*omega_tilde.grid())) throw Error("casimir_form: grid mismatch");
    const ScalarField2D weight = casimir_weight(psi0);
    const EllipticProblem prob = EllipticProblem::dirichlet(g);
    const ScalarField2D psi_t = solve_dirichlet(prob, omega_tilde);
    double J = 0.0;
    for (std::size_t k = 0; k < g->size(); ++k) {
        if (g->boundary_distance(k) < 2) continue;
        J += 0.5 * (omega_tilde[k] * omega_tilde[k] * weight[k] - omega_tilde[k] * psi_t[k]) *
             g->weight(k);
    }
    return J;
}

LinearEvolution evolve_linearized(const ScalarField2D& psi0, const ScalarField2D& omega_init,
                                  double t_end, double dt) {
    const GridPtr& g = psi0.grid();
    if (!g->same_as(*omega_init.grid())) throw Error("evolve_linearized: grid mismatch");
    if (g->kind() == GridKind::Torus)
        throw Error("evolve_linearized: periodic boundaries are not supported; "
                    "use a disk, oval or boxed grid");
    if (!(t_end > 0.0) || !(dt > 0.0)) throw Error("evolve_linearized: t_end and dt must be positive");

    // Alignment gate: rejects bases that are not steady (a field is steady
    // exactly when grad(laplacian psi) is parallel to grad(psi)), and
    // requires a positive ratio so the quadratic form below is definite.
    const ArnoldReport ar = arnold_ratio(psi0);
    if (ar.min <= 0.0)
        throw ArnoldViolation("evolve_linearized: Arnold ratio reaches " + std::to_string(ar.min) +
                              "; the invariant requires a positive ratio");

    ScalarField2D omega0 = ops::laplacian(psi0);

    // Calibrate the vorticity law. When the law is affine, replace the
    // stencil vorticity by its affine model in psi0: the model differs by
    // the same O(h^2) as the stencil itself, but it makes the base exactly
    // steady under the conserving bracket ({psi0, a + b psi0} vanishes
    // identically), so the invariant drift below comes from the time
    // stepper alone instead of carrying a fixed spatial-residual slope.
    double sw = 0.0, sp = 0.0, so = 0.0, spp = 0.0, spo = 0.0;
    for (std::size_t k = 0; k < g->size(); ++k) {
        if (g->boundary_distance(k) < 2) continue;
        const double wk = g->weight(k);
        sw += wk;
        sp += psi0[k] * wk;
        so += omega0[k] * wk;
        spp += psi0[k] * psi0[k] * wk;
        spo += psi0[k] * omega0[k] * wk;
    }
    const double det = sw * spp - sp * sp;
    const double slope = (sw * spo - sp * so) / det;
    const double offset = (so - slope * sp) / sw;
    double fit2 = 0.0, om2 = 0.0;
    for (std::size_t k = 0; k < g->size(); ++k) {
        if (g->boundary_distance(k) < 2) continue;
        const double r = omega0[k] - offset - slope * psi0[k];
        fit2 += r * r * g->weight(k);
        om2 += omega0[k] * omega0[k] * g->weight(k);
    }
    double weight_const;
    if (fit2 <= 9e-4 * om2 && slope > 0.0) {
        for (std::size_t k = 0; k < g->size(); ++k) omega0[k] = offset + slope * psi0[k];
        weight_const = 1.0 / slope;
    } else {
        std::vector<double> kept;
        for (std::size_t k = 0; k < g->size(); ++k)
            if (ar.retained[k] == 1.0) kept.push_back(1.0 / ar.ratio[k]);
        weight_const = median_of(std::move(kept));
    }

    const VectorField2D u0 = ops::perp_gradient(psi0);

    // Advective step limit from the local cell scale.
    double cfl = std::numeric_limits<double>::infinity();
    const bool polar = polar_kind(g);
    for (std::size_t k = 0; k < g->size(); ++k) {
        if (g->boundary_distance(k) < 1) continue;
        if (polar && g->row(k) == 0) continue;
        const double speed = std::hypot(u0.x(k), u0.y(k));
        if (speed <= 0.0) continue;
        cfl = std::min(cfl, std::sqrt(g->weight(k)) / speed);
    }

    LinearEvolution ev;
    ev.cfl_limit = cfl;
    const int nsteps = std::max(1, static_cast<int>(std::llround(t_end / dt)));
    const double step = t_end / nsteps;
    ev.dt = step;
    if (step > cfl)
        throw CFLViolation("evolve_linearized: dt " + std::to_string(step) +
                           " exceeds the advective limit " + std::to_string(cfl));

    const EllipticProblem prob = EllipticProblem::dirichlet(g);

    auto rhs_with = [&](const ScalarField2D& w, const ScalarField2D& psi_t) {
        ScalarField2D r = conserving_bracket(psi0, w);
        r += conserving_bracket(psi_t, omega0);
        r *= -1.0;
        return r;
    };
    auto rhs = [&](const ScalarField2D& w) { return rhs_with(w, solve_dirichlet(prob, w)); };
    auto shifted = [](const ScalarField2D& base, const ScalarField2D& slope, double c) {
        ScalarField2D r = slope;
        r *= c;
        r += base;
        return r;
    };
    auto record = [&](double t, const ScalarField2D& w, const ScalarField2D& psi_t) {
        double J = 0.0, n2 = 0.0;
        for (std::size_t k = 0; k < g->size(); ++k) {
            if (g->boundary_distance(k) < 2) continue;
            const double wk = g->weight(k);
            J += 0.5 * (w[k] * w[k] * weight_const - w[k] * psi_t[k]) * wk;
            n2 += w[k] * w[k] * wk;
        }
        ev.times.push_back(t);
        ev.J.push_back(J);
        ev.l2.push_back(std::sqrt(n2));
    };

    ScalarField2D w = omega_init;
    for (int n = 0; n < nsteps; ++n) {
        const ScalarField2D psi_t = solve_dirichlet(prob, w);
        record(n * step, w, psi_t);
        const ScalarField2D k1 = rhs_with(w, psi_t);
        const ScalarField2D k2 = rhs(shifted(w, k1, 0.5 * step));
        const ScalarField2D k3 = rhs(shifted(w, k2, 0.5 * step));
        const ScalarField2D k4 = rhs(shifted(w, k3, step));
        for (std::size_t k = 0; k < w.size(); ++k)
            w[k] += step / 6.0 * (k1[k] + 2.0 * k2[k] + 2.0 * k3[k] + k4[k]);
    }
    record(t_end, w, solve_dirichlet(prob, w));
    ev.omega_final = std::move(w);
    return ev;
}

SymmetrySplit symmetry_split(const ScalarField2D& psi) {
    const GridPtr& g = psi.grid();
    if (g->kind() != GridKind::Torus)
        throw AsymmetricGrid("symmetry_split: needs a torus grid");
    const int n = g->nx();
    if (g->ny() != n) throw AsymmetricGrid("symmetry_split: needs a square grid");

    SymmetrySplit out;
    out.even = ScalarField2D(g);
    out.odd = ScalarField2D(g);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            const double v = psi.at(j, i);
            const double v_swap = psi.at(i, j);
            const double v_point = psi.at((n - j) % n, (n - i) % n);
            const double v_anti = psi.at((n - i) % n, (n - j) % n);
            const double ee = 0.25 * (v + v_swap + v_point + v_anti);
            out.even.at(j, i) = ee;
            out.odd.at(j, i) = v - ee;
        }
    out.norm_even = out.even.l2();
    out.norm_odd = out.odd.l2();
    return out;
}

HardyReport hardy_check(const ScalarField2D& H, const ScalarField2D& f,
                        const std::vector<Orbit>& periods, double constant) {
    const GridPtr& g = H.grid();
    if (!g->same_as(*f.grid())) throw Error("hardy_check: grid mismatch");
    if (g->kind() != GridKind::Torus || g->nx() != g->ny())
        throw AsymmetricGrid("hardy_check: needs a square torus grid");
    if (periods.empty()) throw Error("hardy_check: empty period table");

    // The orbit means of f vanish when f is odd under the diagonal swap and
    // under point reflection; without that the advective seminorm cannot
    // control f itself and the comparison below is meaningless.
    const int n = g->nx();
    const double ftol = 1e-10 * std::max(f.linf(), 1e-300);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            const double v = f.at(j, i);
            if (std::abs(v + f.at(i, j)) > ftol)
                throw SymmetryViolation("hardy_check: test function is not odd under the diagonal swap");
            if (std::abs(v + f.at((n - j) % n, (n - i) % n)) > ftol)
                throw SymmetryViolation("hardy_check: test function is not odd under point reflection");
        }

    std::vector<std::pair<double, double>> table;  // (|level|, period)
    table.reserve(periods.size());
    for (const Orbit& o : periods) table.push_back({std::abs(o.level), o.T});
    std::sort(table.begin(), table.end());
    auto period_at = [&table](double lv) {
        if (lv <= table.front().first) return table.front().second;
        if (lv >= table.back().first) return table.back().second;
        const auto it = std::lower_bound(table.begin(), table.end(), std::make_pair(lv, 0.0));
        const auto lo = it - 1;
        const double s = (lv - lo->first) / (it->first - lo->first);
        return (1.0 - s) * lo->second + s * it->second;
    };

    const VectorField2D gH = ops::gradient(H);
    const VectorField2D gf = ops::gradient(f);
    const double h = std::sqrt(median_cell_area(g));

    HardyReport rep;
    rep.threshold = constant;
    double total = 0.0, excluded = 0.0;
    for (std::size_t k = 0; k < g->size(); ++k) {
        const double wk = g->weight(k);
        total += wk;
        const double gHn = std::hypot(gH.x(k), gH.y(k));
        if (std::abs(H[k]) < 3.0 * h * gHn) {
            excluded += wk;
            continue;
        }
        const double adv = gH.x(k) * gf.y(k) - gH.y(k) * gf.x(k);
        const double T = period_at(std::abs(H[k]));
        rep.numerator += f[k] * f[k] / (T * T) * wk;
        rep.denominator += adv * adv * wk;
    }
    rep.excluded_measure = excluded / total;
    if (rep.denominator == 0.0) {
        rep.vacuous = rep.numerator == 0.0;
        rep.ratio = rep.vacuous ? 0.0 : std::numeric_limits<double>::infinity();
        rep.pass = rep.vacuous;
        return rep;
    }
    rep.ratio = rep.numerator / rep.denominator;
    rep.pass = rep.ratio <= constant;
    return rep;
}

}  // namespace ef
