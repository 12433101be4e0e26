#include "ef/contour.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "ef/ops.hpp"

namespace ef {

namespace {

/// A contour vertex on a cell edge, in continuous index coordinates, with
/// room for the two links every closed-contour vertex ends up with.
struct CVert {
    double col = 0.0;
    double row = 0.0;
    std::array<int, 2> nbr{-1, -1};
    std::array<bool, 2> used{false, false};
};

struct Builder {
    const Grid2D& g;
    std::vector<CVert> verts;
    std::unordered_map<std::int64_t, int> edge2vert;

    explicit Builder(const Grid2D& grid) : g(grid) {}

    int vertex_for(std::int64_t eid, double c, double r) {
        auto it = edge2vert.find(eid);
        if (it != edge2vert.end()) return it->second;
        const int id = static_cast<int>(verts.size());
        CVert v;
        v.col = c;
        v.row = r;
        verts.push_back(v);
        edge2vert.emplace(eid, id);
        return id;
    }

    void link(int a, int b) {
        attach(a, b);
        attach(b, a);
    }

    void attach(int a, int b) {
        for (int s = 0; s < 2; ++s)
            if (verts[a].nbr[s] < 0) {
                verts[a].nbr[s] = b;
                return;
            }
        throw Error("extract_level_components: contour vertex with more than two links "
                    "(degenerate level data)");
    }
};

/// Crossing parameter of `level` between fa (t = 0) and fb (t = 1); the
/// caller guarantees a strict sign change so fb - fa is bounded away from 0.
double crossing(double fa, double fb, double level) {
    const double t = (level - fa) / (fb - fa);
    return std::min(1.0, std::max(0.0, t));
}

} // namespace

double polygon_signed_area(const std::vector<Vec2>& pts) {
    double a = 0.0;
    const std::size_t n = pts.size();
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) a += pts[j].cross(pts[i]);
    return 0.5 * a;
}

double polygon_perimeter(const std::vector<Vec2>& pts) {
    double s = 0.0;
    const std::size_t n = pts.size();
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) s += (pts[i] - pts[j]).norm();
    return s;
}

bool point_in_polygon(const std::vector<Vec2>& poly, Vec2 p) {
    bool in = false;
    const std::size_t n = poly.size();
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
        const Vec2 a = poly[j], b = poly[i];
        if ((a.y > p.y) != (b.y > p.y)) {
            const double xint = a.x + (p.y - a.y) / (b.y - a.y) * (b.x - a.x);
            if (p.x < xint) in = !in;
        }
    }
    return in;
}

std::vector<LevelComponent> extract_level_components(const ScalarField2D& f, double level,
                                                     double grad_threshold_rel) {
    const Grid2D& g = *f.grid();
    const int nx = g.nx(), ny = g.ny();
    const bool col_wraps = g.kind() != GridKind::Cartesian;
    const bool row_wraps = g.kind() == GridKind::Torus;

    double fmin = f[0], fmax = f[0];
    for (std::size_t k = 1; k < g.size(); ++k) {
        fmin = std::min(fmin, f[k]);
        fmax = std::max(fmax, f[k]);
    }
    if (!(level > fmin && level < fmax))
        throw EmptyLevel("extract_level_components: level " + std::to_string(level) +
                         " outside field range [" + std::to_string(fmin) + ", " +
                         std::to_string(fmax) + "]");

    Builder b(g);
    const int cell_rows = row_wraps ? ny : ny - 1;
    const int cell_cols = col_wraps ? nx : nx - 1;
    const auto horiz_edge = [&](int j, int i) {
        return 2 * (static_cast<std::int64_t>(j) * nx + i);
    };
    const auto vert_edge = [&](int j, int i) {
        return 2 * (static_cast<std::int64_t>(j) * nx + i) + 1;
    };

    for (int j = 0; j < cell_rows; ++j) {
        const int j1 = g.wrap_row(j + 1);
        for (int i = 0; i < cell_cols; ++i) {
            const int i1 = g.wrap_col(i + 1);
            const double f00 = f.at(j, i), f01 = f.at(j, i1);
            const double f10 = f.at(j1, i), f11 = f.at(j1, i1);
            const bool s00 = f00 > level, s01 = f01 > level;
            const bool s10 = f10 > level, s11 = f11 > level;

            // Sides in cell order: 0 bottom, 1 right, 2 top, 3 left. Each
            // side stores its canonical edge id and the crossing vertex in
            // continuous (col, row) index coordinates.
            std::array<bool, 4> crossed{s00 != s01, s01 != s11, s10 != s11, s00 != s10};
            int ncross = 0;
            for (bool c : crossed) ncross += c ? 1 : 0;
            if (ncross == 0) continue;

            std::array<int, 4> vid{-1, -1, -1, -1};
            if (crossed[0])
                vid[0] = b.vertex_for(horiz_edge(j, i), i + crossing(f00, f01, level), j);
            if (crossed[1])
                vid[1] = b.vertex_for(vert_edge(j, i1), i + 1.0, j + crossing(f01, f11, level));
            if (crossed[2])
                vid[2] = b.vertex_for(horiz_edge(j1, i), i + crossing(f10, f11, level), j + 1.0);
            if (crossed[3])
                vid[3] = b.vertex_for(vert_edge(j, i), i, j + crossing(f00, f10, level));

            if (ncross == 2) {
                int a = -1, c = -1;
                for (int s = 0; s < 4; ++s)
                    if (crossed[s]) (a < 0 ? a : c) = s;
                b.link(vid[a], vid[c]);
            } else {
                // Saddle cell: both diagonals change sign. The bilinear
                // center value decides which pairs of arcs separate.
                const bool center_above = 0.25 * (f00 + f01 + f10 + f11) > level;
                if (center_above == s00) {
                    b.link(vid[0], vid[1]);
                    b.link(vid[2], vid[3]);
                } else {
                    b.link(vid[3], vid[0]);
                    b.link(vid[1], vid[2]);
                }
            }
        }
    }

    // Walk the link graph into chains, unwrapping periodic jumps by
    // continuity; only closed, contractible chains survive.
    const auto unwrap = [&](double prev, double cur, int n, bool wraps) {
        if (!wraps) return cur;
        while (cur - prev > 0.5 * n) cur -= n;
        while (prev - cur > 0.5 * n) cur += n;
        return cur;
    };

    std::vector<LevelComponent> comps;
    std::vector<std::vector<int>> loops;
    for (int start = 0; start < static_cast<int>(b.verts.size()); ++start) {
        for (int s0 = 0; s0 < 2; ++s0) {
            if (b.verts[start].nbr[s0] < 0 || b.verts[start].used[s0]) continue;
            std::vector<int> path{start};
            int cur = start;
            int take = s0;
            bool closed = false;
            while (true) {
                b.verts[cur].used[take] = true;
                const int nxt = b.verts[cur].nbr[take];
                // Consume the reciprocal link so the walk never doubles back.
                int back = -1;
                for (int s = 0; s < 2; ++s)
                    if (b.verts[nxt].nbr[s] == cur && !b.verts[nxt].used[s]) {
                        back = s;
                        break;
                    }
                if (back >= 0) b.verts[nxt].used[back] = true;
                if (nxt == start) {
                    closed = true;
                    break;
                }
                path.push_back(nxt);
                int fwd = -1;
                for (int s = 0; s < 2; ++s)
                    if (b.verts[nxt].nbr[s] >= 0 && !b.verts[nxt].used[s]) {
                        fwd = s;
                        break;
                    }
                if (fwd < 0) break; // open chain (boundary exit): dropped
                cur = nxt;
                take = fwd;
            }
            if (closed && path.size() >= 3) loops.push_back(std::move(path));
        }
    }

    if (loops.empty())
        throw EmptyLevel("extract_level_components: no closed component at level " +
                         std::to_string(level));

    const VectorField2D grad = ops::gradient(f);
    ScalarField2D gmag(f.grid());
    double gmax = 0.0;
    for (std::size_t k = 0; k < g.size(); ++k) {
        gmag[k] = grad.at(k).norm();
        gmax = std::max(gmax, gmag[k]);
    }
    const double gthresh = grad_threshold_rel * gmax;
    const auto gmag_at = [&](double c, double r) {
        int j0 = static_cast<int>(std::floor(r));
        int i0 = static_cast<int>(std::floor(c));
        if (!row_wraps) j0 = std::min(std::max(j0, 0), ny - 2);
        if (!col_wraps) i0 = std::min(std::max(i0, 0), nx - 2);
        const double u = c - i0, v = r - j0;
        const int i1 = g.wrap_col(i0 + 1), j1 = g.wrap_row(j0 + 1);
        const int i0w = g.wrap_col(i0), j0w = g.wrap_row(j0);
        return (1 - v) * ((1 - u) * gmag.at(j0w, i0w) + u * gmag.at(j0w, i1)) +
               v * ((1 - u) * gmag.at(j1, i0w) + u * gmag.at(j1, i1));
    };

    for (const auto& loop : loops) {
        std::vector<Vec2> pts;
        pts.reserve(loop.size());
        double pc = b.verts[loop[0]].col, pr = b.verts[loop[0]].row;
        const double c0 = pc, r0 = pr;
        for (int id : loop) {
            const double c = unwrap(pc, b.verts[id].col, nx, col_wraps);
            const double r = unwrap(pr, b.verts[id].row, ny, row_wraps);
            if (gmag_at(b.verts[id].col, b.verts[id].row) < gthresh)
                throw NearCriticalLevel("extract_level_components: level " +
                                        std::to_string(level) +
                                        " passes within the critical-point guard band");
            Vec2 compc;
            if (g.kind() == GridKind::DiskPolar || g.kind() == GridKind::OvalMapped)
                compc = {c * g.dx(), r * g.dy()};
            else
                compc = {g.lo().x + c * g.dx(), g.lo().y + r * g.dy()};
            pts.push_back(g.to_physical(compc));
            pc = c;
            pr = r;
        }
        if (g.kind() == GridKind::Torus) {
            // Non-contractible loops close only after winding round a
            // period; those are not enclosing curves and are discarded.
            const double cc = unwrap(pc, c0, nx, true), cr = unwrap(pr, r0, ny, true);
            if (std::abs(cc - c0) > 0.5 || std::abs(cr - r0) > 0.5) continue;
        }
        LevelComponent comp;
        comp.level = level;
        const double a = polygon_signed_area(pts);
        if (a < 0.0) std::reverse(pts.begin(), pts.end());
        comp.enclosed_area = std::abs(a);
        comp.points = std::move(pts);
        comps.push_back(std::move(comp));
    }

    if (comps.empty())
        throw EmptyLevel("extract_level_components: only non-enclosing components at level " +
                         std::to_string(level));
    std::sort(comps.begin(), comps.end(), [](const LevelComponent& a, const LevelComponent& c) {
        return a.enclosed_area > c.enclosed_area;
    });
    return comps;
}

} // namespace ef
