#include "ef/interp.hpp"

#include <algorithm>
#include <cmath>

namespace ef {

namespace {

/// Exponent pairs (a, b) of the quartic patch monomials x^a y^b, a+b <= 4.
constexpr int kPatchExp[15][2] = {{0, 0}, {1, 0}, {0, 1}, {2, 0}, {1, 1},
                                  {0, 2}, {3, 0}, {2, 1}, {1, 2}, {0, 3},
                                  {4, 0}, {3, 1}, {2, 2}, {1, 3}, {0, 4}};

double ipow(double x, int n) {
    double r = 1.0;
    for (int k = 0; k < n; ++k) r *= x;
    return r;
}

/// In-place Gaussian elimination with partial pivoting for the small dense
/// normal-equation systems used by the origin patch.
void solve_dense(std::vector<double>& a, std::vector<double>& b, int n) {
    for (int p = 0; p < n; ++p) {
        int best = p;
        for (int r = p + 1; r < n; ++r)
            if (std::abs(a[r * n + p]) > std::abs(a[best * n + p])) best = r;
        if (best != p) {
            for (int c = 0; c < n; ++c) std::swap(a[p * n + c], a[best * n + c]);
            std::swap(b[p], b[best]);
        }
        const double piv = a[p * n + p];
        if (std::abs(piv) < 1e-300) throw SolverBreakdown("FieldSampler: singular patch fit");
        for (int r = p + 1; r < n; ++r) {
            const double m = a[r * n + p] / piv;
            if (m == 0.0) continue;
            for (int c = p; c < n; ++c) a[r * n + c] -= m * a[p * n + c];
            b[r] -= m * b[p];
        }
    }
    for (int p = n - 1; p >= 0; --p) {
        double s = b[p];
        for (int c = p + 1; c < n; ++c) s -= a[p * n + c] * b[c];
        b[p] = s / a[p * n + p];
    }
}

} // namespace

FieldSampler::FieldSampler(const ScalarField2D& f)
    : grid_(f.grid()), kind_(f.grid()->kind()), data_(f.data(), f.data() + f.grid()->size()) {
    if (polar()) build_patch();
}

double FieldSampler::node(int j, int i) const {
    const Grid2D& g = *grid_;
    const int nx = g.nx(), ny = g.ny();
    switch (kind_) {
    case GridKind::DiskPolar:
    case GridKind::OvalMapped: {
        if (j < 0) {
            j = -j;
            i += nx / 2;
        }
        i = g.wrap_col(i);
        if (j > ny - 1) {
            const double m = j - (ny - 1);
            return (1.0 + m) * data_[g.index(ny - 1, i)] - m * data_[g.index(ny - 2, i)];
        }
        return data_[g.index(j, i)];
    }
    case GridKind::Torus:
        return data_[g.index(g.wrap_row(j), g.wrap_col(i))];
    case GridKind::Cartesian:
        if (j < 0) return 2.0 * node(0, i) - node(1, i);
        if (j > ny - 1) return 2.0 * node(ny - 1, i) - node(ny - 2, i);
        if (i < 0) return 2.0 * node(j, 0) - node(j, 1);
        if (i > nx - 1) return 2.0 * node(j, nx - 1) - node(j, nx - 2);
        return data_[g.index(j, i)];
    }
    return 0.0;
}

void FieldSampler::weights_1d(double t, std::array<double, 4>& w,
                              std::array<double, 4>& dw) const {
    const double t2 = t * t, t3 = t2 * t;
    w[0] = 0.5 * (-t3 + 2.0 * t2 - t);
    w[1] = 0.5 * (3.0 * t3 - 5.0 * t2 + 2.0);
    w[2] = 0.5 * (-3.0 * t3 + 4.0 * t2 + t);
    w[3] = 0.5 * (t3 - t2);
    dw[0] = 0.5 * (-3.0 * t2 + 4.0 * t - 1.0);
    dw[1] = 0.5 * (9.0 * t2 - 10.0 * t);
    dw[2] = 0.5 * (-9.0 * t2 + 8.0 * t + 1.0);
    dw[3] = 0.5 * (3.0 * t2 - 2.0 * t);
}

void FieldSampler::gather(Vec2 comp, double& val, double& d_col, double& d_row) const {
    const Grid2D& g = *grid_;
    double ci, rj;
    if (polar()) {
        ci = comp.x / g.dx();
        rj = comp.y / g.dy();
    } else {
        ci = (comp.x - g.lo().x) / g.dx();
        rj = (comp.y - g.lo().y) / g.dy();
    }
    const int i0 = static_cast<int>(std::floor(ci));
    const int j0 = static_cast<int>(std::floor(rj));
    const double u = ci - i0, v = rj - j0;
    std::array<double, 4> wu, du, wv, dv;
    weights_1d(u, wu, du);
    weights_1d(v, wv, dv);
    val = d_col = d_row = 0.0;
    for (int m = 0; m < 4; ++m) {
        double rowv = 0.0, rowd = 0.0;
        for (int n = 0; n < 4; ++n) {
            const double fv = node(j0 - 1 + m, i0 - 1 + n);
            rowv += wu[n] * fv;
            rowd += du[n] * fv;
        }
        val += wv[m] * rowv;
        d_col += wv[m] * rowd;
        d_row += dv[m] * rowv;
    }
}

void FieldSampler::build_patch() {
    const Grid2D& g = *grid_;
    const int rows = std::min(g.ny() - 1, 6);
    patch_scale_ = rows * g.dy();
    std::vector<double> M(15 * 15, 0.0), rhs(15, 0.0);
    std::array<double, 15> phi{};
    const auto add_sample = [&](double X, double Y, double f) {
        for (int k = 0; k < 15; ++k) phi[k] = ipow(X, kPatchExp[k][0]) * ipow(Y, kPatchExp[k][1]);
        for (int a = 0; a < 15; ++a) {
            rhs[a] += phi[a] * f;
            for (int b = 0; b < 15; ++b) M[a * 15 + b] += phi[a] * phi[b];
        }
    };
    add_sample(0.0, 0.0, data_[g.index(0, 0)]);
    for (int j = 1; j <= rows; ++j)
        for (int i = 0; i < g.nx(); ++i) {
            const double r = j * g.dy() / patch_scale_;
            const double th = i * g.dx();
            add_sample(r * std::cos(th), r * std::sin(th), data_[g.index(j, i)]);
        }
    solve_dense(M, rhs, 15);
    for (int k = 0; k < 15; ++k) patch_[k] = rhs[k];
}

double FieldSampler::patch_value(Vec2 c) const {
    const double X = c.x / patch_scale_, Y = c.y / patch_scale_;
    double s = 0.0;
    for (int k = 0; k < 15; ++k) s += patch_[k] * ipow(X, kPatchExp[k][0]) * ipow(Y, kPatchExp[k][1]);
    return s;
}

Vec2 FieldSampler::patch_grad(Vec2 c) const {
    const double X = c.x / patch_scale_, Y = c.y / patch_scale_;
    double gx = 0.0, gy = 0.0;
    for (int k = 0; k < 15; ++k) {
        const int a = kPatchExp[k][0], b = kPatchExp[k][1];
        if (a > 0) gx += patch_[k] * a * ipow(X, a - 1) * ipow(Y, b);
        if (b > 0) gy += patch_[k] * b * ipow(X, a) * ipow(Y, b - 1);
    }
    return {gx / patch_scale_, gy / patch_scale_};
}

std::array<double, 3> FieldSampler::patch_hess(Vec2 c) const {
    const double X = c.x / patch_scale_, Y = c.y / patch_scale_;
    double xx = 0.0, xy = 0.0, yy = 0.0;
    for (int k = 0; k < 15; ++k) {
        const int a = kPatchExp[k][0], b = kPatchExp[k][1];
        if (a > 1) xx += patch_[k] * a * (a - 1) * ipow(X, a - 2) * ipow(Y, b);
        if (a > 0 && b > 0) xy += patch_[k] * a * b * ipow(X, a - 1) * ipow(Y, b - 1);
        if (b > 1) yy += patch_[k] * b * (b - 1) * ipow(X, a) * ipow(Y, b - 2);
    }
    const double s2 = patch_scale_ * patch_scale_;
    return {xx / s2, xy / s2, yy / s2};
}

double FieldSampler::value_c(Vec2 c) const {
    if (!polar()) {
        double v, dc, dr;
        gather(c, v, dc, dr);
        return v;
    }
    const double r = c.norm();
    const double dy = grid_->dy();
    if (r < dy) return patch_value(c);
    double th = std::atan2(c.y, c.x);
    if (th < 0) th += 2.0 * M_PI;
    double v, dc, drv;
    gather({th, r}, v, dc, drv);
    if (r >= 2.0 * dy) return v;
    const double t = (r - dy) / dy;
    const double s = t * t * (3.0 - 2.0 * t);
    return (1.0 - s) * patch_value(c) + s * v;
}

Vec2 FieldSampler::grad_c(Vec2 c) const {
    const Grid2D& g = *grid_;
    if (!polar()) {
        double v, dc, dr;
        gather(c, v, dc, dr);
        return {dc / g.dx(), dr / g.dy()};
    }
    const double r = c.norm();
    const double dy = g.dy();
    if (r < dy) return patch_grad(c);
    double th = std::atan2(c.y, c.x);
    if (th < 0) th += 2.0 * M_PI;
    double v, dcol, drow;
    gather({th, r}, v, dcol, drow);
    const double ft = dcol / g.dx();
    const double fr = drow / g.dy();
    const double cth = std::cos(th), sth = std::sin(th);
    const Vec2 gc{cth * fr - sth * ft / r, sth * fr + cth * ft / r};
    if (r >= 2.0 * dy) return gc;
    // Blend zone: gradient of the blended value, including the weight term,
    // so grad_c stays the exact derivative of value_c.
    const double t = (r - dy) / dy;
    const double s = t * t * (3.0 - 2.0 * t);
    const double dsdr = 6.0 * t * (1.0 - t) / dy;
    const Vec2 rhat{c.x / r, c.y / r};
    const double pv = patch_value(c);
    const Vec2 pg = patch_grad(c);
    return (1.0 - s) * pg + s * gc + dsdr * (v - pv) * rhat;
}

std::array<double, 3> FieldSampler::hess_c(Vec2 c) const {
    if (polar() && c.norm() < grid_->dy()) return patch_hess(c);
    const double h = 0.5 * (polar() ? grid_->dy() : std::min(grid_->dx(), grid_->dy()));
    const Vec2 gxp = grad_c({c.x + h, c.y}), gxm = grad_c({c.x - h, c.y});
    const Vec2 gyp = grad_c({c.x, c.y + h}), gym = grad_c({c.x, c.y - h});
    const double fxx = (gxp.x - gxm.x) / (2.0 * h);
    const double fyy = (gyp.y - gym.y) / (2.0 * h);
    const double fxy = 0.5 * ((gxp.y - gxm.y) + (gyp.x - gym.x)) / (2.0 * h);
    return {fxx, fxy, fyy};
}

double FieldSampler::value_comp(Vec2 comp) const {
    if (!polar()) return value_c(comp);
    return value_c({comp.y * std::cos(comp.x), comp.y * std::sin(comp.x)});
}

Vec2 FieldSampler::grad_comp(Vec2 comp) const {
    if (!polar()) return grad_c(comp);
    return grad_c({comp.y * std::cos(comp.x), comp.y * std::sin(comp.x)});
}

double FieldSampler::value_phys(Vec2 p) const {
    if (!polar()) return value_c(p);
    const Vec2 comp = grid_->to_computational(p);
    return value_comp(comp);
}

Vec2 FieldSampler::grad_phys(Vec2 p) const {
    if (!polar()) return grad_c(p);
    const Vec2 comp = grid_->to_computational(p);
    const cplx z(comp.y * std::cos(comp.x), comp.y * std::sin(comp.x));
    const Vec2 gz = grad_c({z.real(), z.imag()});
    const cplx gw = cplx(gz.x, gz.y) / std::conj(grid_->map()->derivative(z));
    return {gw.real(), gw.imag()};
}

double FieldSampler::conformal_c(Vec2 c) const {
    if (!polar()) return 1.0;
    return std::norm(grid_->map()->derivative(cplx(c.x, c.y)));
}

} // namespace ef
