#include "ef/ops.hpp"

#include <cmath>

namespace ef::ops {

namespace {

/// Computational-frame first derivatives of a scalar field at node (j, i):
/// d/dcol and d/drow in grid spacing units of 1 (divide by dx/dy outside).
struct Stencil {
    const ScalarField2D& f;
    const Grid2D& g;

    double dcol(int j, int i) const {
        if (g.kind() == GridKind::Cartesian) {
            if (i == 0) return (-3.0 * f.at(j, 0) + 4.0 * f.at(j, 1) - f.at(j, 2)) / 2.0;
            if (i == g.nx() - 1)
                return (3.0 * f.at(j, i) - 4.0 * f.at(j, i - 1) + f.at(j, i - 2)) / 2.0;
        }
        return (f.at(j, i + 1) - f.at(j, i - 1)) / 2.0;
    }

    double drow(int j, int i) const {
        const int last = g.ny() - 1;
        if (g.kind() == GridKind::Torus)
            return (f.at(g.wrap_row(j + 1), i) - f.at(g.wrap_row(j - 1), i)) / 2.0;
        if (j == 0) return (-3.0 * f.at(0, i) + 4.0 * f.at(1, i) - f.at(2, i)) / 2.0;
        if (j == last) return (3.0 * f.at(j, i) - 4.0 * f.at(j - 1, i) + f.at(j - 2, i)) / 2.0;
        return (f.at(j + 1, i) - f.at(j - 1, i)) / 2.0;
    }
};

/// Gradient at the polar origin from the Fourier cos/sin projection of the
/// first ring; exact for fields linear near the center and second-order
/// accurate in general. Returned in the computational (disk) frame.
Vec2 origin_gradient(const ScalarField2D& f, const Grid2D& g) {
    const int nt = g.nx();
    double cx = 0.0, cy = 0.0;
    for (int i = 0; i < nt; ++i) {
        const double th = i * g.dx();
        cx += f.at(1, i) * std::cos(th);
        cy += f.at(1, i) * std::sin(th);
    }
    const double s = 2.0 / (nt * g.dy());
    return {s * cx, s * cy};
}

bool polar_kind(const Grid2D& g) {
    return g.kind() == GridKind::DiskPolar || g.kind() == GridKind::OvalMapped;
}

/// Computational-frame (disk-plane) gradient components at any polar node.
Vec2 polar_comp_gradient(const Stencil& st, const Grid2D& g, int j, int i, const Vec2& og) {
    if (j == 0) return og;
    const double r = j * g.dy();
    const double th = i * g.dx();
    const double fr = st.drow(j, i) / g.dy();
    const double ft = st.dcol(j, i) / g.dx() / r;
    const double c = std::cos(th), s = std::sin(th);
    return {c * fr - s * ft, s * fr + c * ft};
}

/// Transforms a computational (disk-plane) vector to the physical frame of
/// an oval grid: g_w = g_z / conj(f'(z)).
Vec2 to_physical_frame(const Grid2D& g, std::size_t k, Vec2 v) {
    if (g.kind() != GridKind::OvalMapped) return v;
    const Vec2 c = g.comp(k);
    const cplx z(c.y * std::cos(c.x), c.y * std::sin(c.x));
    const cplx gw = cplx(v.x, v.y) / std::conj(g.map()->derivative(z));
    return {gw.real(), gw.imag()};
}

} // namespace

VectorField2D gradient(const ScalarField2D& f) {
    const Grid2D& g = *f.grid();
    VectorField2D out(f.grid());
    const Stencil st{f, g};
    if (polar_kind(g)) {
        const Vec2 og = origin_gradient(f, g);
        par::for_each(static_cast<std::int64_t>(g.size()), [&](std::int64_t k) {
            const int j = g.row(k), i = g.col(k);
            out.set(k, to_physical_frame(g, k, polar_comp_gradient(st, g, j, i, og)));
        });
    } else {
        par::for_each(static_cast<std::int64_t>(g.size()), [&](std::int64_t k) {
            const int j = g.row(k), i = g.col(k);
            out.set(k, {st.dcol(j, i) / g.dx(), st.drow(j, i) / g.dy()});
        });
    }
    return out;
}

VectorField2D perp_gradient(const ScalarField2D& f) {
    VectorField2D grad = gradient(f);
    VectorField2D out(f.grid());
    for (std::size_t k = 0; k < grad.size(); ++k) out.set(k, grad.at(k).perp());
    return out;
}

ScalarField2D laplacian(const ScalarField2D& f) {
    const Grid2D& g = *f.grid();
    ScalarField2D out(f.grid());
    if (polar_kind(g)) {
        const double dr = g.dy(), dt = g.dx();
        const int nr = g.nr(), nt = g.nx();
        // Origin: averaging stencil over the first ring.
        double ring = 0.0;
        for (int i = 0; i < nt; ++i) ring += f.at(1, i);
        const double lap0 = 4.0 / (dr * dr) * (ring / nt - f.at(0, 0));
        par::for_each(static_cast<std::int64_t>(g.size()), [&](std::int64_t k) {
            const int j = g.row(k), i = g.col(k);
            if (j == 0) {
                out[k] = lap0;
                return;
            }
            const double r = j * dr;
            double lap;
            if (j < nr) {
                const double flux =
                    (r + dr / 2) * (f.at(j + 1, i) - f.at(j, i)) -
                    (r - dr / 2) * (f.at(j, i) - f.at(j - 1, i));
                const double ftt = f.at(j, i + 1) - 2.0 * f.at(j, i) + f.at(j, i - 1);
                lap = flux / (r * dr * dr) + ftt / (r * r * dt * dt);
            } else {
                const double frr = (2.0 * f.at(j, i) - 5.0 * f.at(j - 1, i) +
                                    4.0 * f.at(j - 2, i) - f.at(j - 3, i)) /
                                   (dr * dr);
                const double fr = (3.0 * f.at(j, i) - 4.0 * f.at(j - 1, i) + f.at(j - 2, i)) /
                                  (2.0 * dr);
                const double ftt = f.at(j, i + 1) - 2.0 * f.at(j, i) + f.at(j, i - 1);
                lap = frr + fr / r + ftt / (r * r * dt * dt);
            }
            out[k] = lap / g.conformal(k);
        });
    } else {
        const double hx2 = g.dx() * g.dx(), hy2 = g.dy() * g.dy();
        const bool wrap = g.kind() == GridKind::Torus;
        par::for_each(static_cast<std::int64_t>(g.size()), [&](std::int64_t k) {
            const int j = g.row(k), i = g.col(k);
            double fxx, fyy;
            if (!wrap && (i == 0 || i == g.nx() - 1)) {
                const int d = (i == 0) ? 1 : -1;
                fxx = (2.0 * f.at(j, i) - 5.0 * f.at(j, i + d) + 4.0 * f.at(j, i + 2 * d) -
                       f.at(j, i + 3 * d)) /
                      hx2;
            } else {
                fxx = (f.at(j, i + 1) - 2.0 * f.at(j, i) + f.at(j, i - 1)) / hx2;
            }
            if (!wrap && (j == 0 || j == g.ny() - 1)) {
                const int d = (j == 0) ? 1 : -1;
                fyy = (2.0 * f.at(j, i) - 5.0 * f.at(j + d, i) + 4.0 * f.at(j + 2 * d, i) -
                       f.at(j + 3 * d, i)) /
                      hy2;
            } else {
                fyy = (f.at(g.wrap_row(j + 1), i) - 2.0 * f.at(j, i) +
                       f.at(g.wrap_row(j - 1), i)) /
                      hy2;
            }
            out[k] = fxx + fyy;
        });
    }
    return out;
}

ScalarField2D bracket(const ScalarField2D& a, const ScalarField2D& b) {
    check_same_grid(a, b, "bracket");
    const Grid2D& g = *a.grid();
    ScalarField2D out(a.grid());
    const Stencil sa{a, g}, sb{b, g};
    if (polar_kind(g)) {
        const Vec2 oa = origin_gradient(a, g), ob = origin_gradient(b, g);
        par::for_each(static_cast<std::int64_t>(g.size()), [&](std::int64_t k) {
            const int j = g.row(k), i = g.col(k);
            if (j == 0) {
                out[k] = (oa.x * ob.y - oa.y * ob.x) / g.conformal(k);
                return;
            }
            const double r = j * g.dy();
            const double jac = sa.drow(j, i) * sb.dcol(j, i) - sa.dcol(j, i) * sb.drow(j, i);
            out[k] = jac / (g.dy() * g.dx() * r * g.conformal(k));
        });
    } else {
        par::for_each(static_cast<std::int64_t>(g.size()), [&](std::int64_t k) {
            const int j = g.row(k), i = g.col(k);
            const double jac = sa.dcol(j, i) * sb.drow(j, i) - sa.drow(j, i) * sb.dcol(j, i);
            out[k] = jac / (g.dx() * g.dy());
        });
    }
    return out;
}

ScalarField2D divergence(const VectorField2D& v) {
    const Grid2D& g = *v.grid();
    ScalarField2D out(v.grid());
    // Component fields reuse the scalar stencils.
    ScalarField2D fx(v.grid()), fy(v.grid());
    for (std::size_t k = 0; k < v.size(); ++k) {
        fx[k] = v.x(k);
        fy[k] = v.y(k);
    }
    const Stencil sx{fx, g}, sy{fy, g};
    if (polar_kind(g)) {
        const Vec2 ox = origin_gradient(fx, g), oy = origin_gradient(fy, g);
        par::for_each(static_cast<std::int64_t>(g.size()), [&](std::int64_t k) {
            const int j = g.row(k), i = g.col(k);
            const Vec2 gx = polar_comp_gradient(sx, g, j, i, ox);
            const Vec2 gy = polar_comp_gradient(sy, g, j, i, oy);
            if (g.kind() == GridKind::DiskPolar) {
                out[k] = gx.x + gy.y;
                return;
            }
            // div_w F = Re[((F1_x + F2_y) + i(F2_x - F1_y)) / f'(z)] with the
            // partials taken in the disk frame.
            const Vec2 c = g.comp(k);
            const cplx z(c.y * std::cos(c.x), c.y * std::sin(c.x));
            const cplx num(gx.x + gy.y, gy.x - gx.y);
            out[k] = (num / g.map()->derivative(z)).real();
        });
    } else {
        par::for_each(static_cast<std::int64_t>(g.size()), [&](std::int64_t k) {
            const int j = g.row(k), i = g.col(k);
            out[k] = sx.dcol(j, i) / g.dx() + sy.drow(j, i) / g.dy();
        });
    }
    return out;
}

} // namespace ef::ops
