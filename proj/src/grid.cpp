#include "ef/grid.hpp"

#include <algorithm>
#include <string>

namespace ef {

namespace {

void require_counts(int nx, int ny) {
    if (nx < 16 || ny < 16)
        throw Error("Grid2D: node counts must be at least 16 per axis, got " +
                    std::to_string(nx) + " x " + std::to_string(ny));
}

} // namespace

GridPtr Grid2D::disk(int nr, int ntheta) { return oval(0.0, nr, ntheta); }

GridPtr Grid2D::oval(double q, int nr, int ntheta) {
    require_counts(ntheta, nr + 1);
    if (ntheta % 2 != 0)
        throw Error("Grid2D: polar grids need an even theta count for the "
                    "reflection rule through the origin, got " +
                    std::to_string(ntheta));
    auto g = std::shared_ptr<Grid2D>(new Grid2D());
    g->kind_ = (q == 0.0) ? GridKind::DiskPolar : GridKind::OvalMapped;
    g->nx_ = ntheta;
    g->ny_ = nr + 1;
    g->dx_ = 2.0 * M_PI / ntheta;
    g->dy_ = 1.0 / nr;
    g->lo_ = {0.0, 0.0};
    g->hi_ = {2.0 * M_PI, 1.0};
    g->map_.emplace(q);
    g->finalize();
    return g;
}

GridPtr Grid2D::torus(int nx, int ny) {
    require_counts(nx, ny);
    auto g = std::shared_ptr<Grid2D>(new Grid2D());
    g->kind_ = GridKind::Torus;
    g->nx_ = nx;
    g->ny_ = ny;
    g->dx_ = 2.0 * M_PI / nx;
    g->dy_ = 2.0 * M_PI / ny;
    g->lo_ = {-M_PI, -M_PI};
    g->hi_ = {M_PI, M_PI};
    g->finalize();
    return g;
}

GridPtr Grid2D::cartesian(int nx, int ny, Vec2 lo, Vec2 hi) {
    require_counts(nx, ny);
    if (!(hi.x > lo.x) || !(hi.y > lo.y)) throw Error("Grid2D: empty cartesian box");
    auto g = std::shared_ptr<Grid2D>(new Grid2D());
    g->kind_ = GridKind::Cartesian;
    g->nx_ = nx;
    g->ny_ = ny;
    g->dx_ = (hi.x - lo.x) / (nx - 1);
    g->dy_ = (hi.y - lo.y) / (ny - 1);
    g->lo_ = lo;
    g->hi_ = hi;
    g->finalize();
    return g;
}

void Grid2D::finalize() {
    const std::size_t n = size();
    weight_.resize(n);
    conformal_.assign(n, 1.0);
    switch (kind_) {
    case GridKind::DiskPolar:
    case GridKind::OvalMapped: {
        const double dr = dy_, dt = dx_;
        for (int j = 0; j < ny_; ++j) {
            for (int i = 0; i < nx_; ++i) {
                const std::size_t k = index(j, i);
                const double r = j * dr;
                const double th = i * dt;
                const cplx z(r * std::cos(th), r * std::sin(th));
                const cplx fp = map_->derivative(z);
                conformal_[k] = std::norm(fp);
                double area;
                if (j == 0) {
                    area = M_PI * dr * dr / 4.0 / nx_;
                } else if (j == ny_ - 1) {
                    const double rin = 1.0 - dr / 2.0;
                    area = 0.5 * (1.0 - rin * rin) * dt;
                } else {
                    area = r * dr * dt;
                }
                weight_[k] = area * conformal_[k];
            }
        }
        break;
    }
    case GridKind::Torus:
        std::fill(weight_.begin(), weight_.end(), dx_ * dy_);
        break;
    case GridKind::Cartesian:
        for (int j = 0; j < ny_; ++j)
            for (int i = 0; i < nx_; ++i) {
                const double wx = (i == 0 || i == nx_ - 1) ? 0.5 : 1.0;
                const double wy = (j == 0 || j == ny_ - 1) ? 0.5 : 1.0;
                weight_[index(j, i)] = wx * wy * dx_ * dy_;
            }
        break;
    }
}

Vec2 Grid2D::comp(std::size_t k) const {
    const int j = row(k), i = col(k);
    switch (kind_) {
    case GridKind::DiskPolar:
    case GridKind::OvalMapped:
        return {i * dx_, j * dy_};
    case GridKind::Torus:
    case GridKind::Cartesian:
        return {lo_.x + i * dx_, lo_.y + j * dy_};
    }
    return {};
}

Vec2 Grid2D::to_physical(Vec2 c) const {
    switch (kind_) {
    case GridKind::DiskPolar:
    case GridKind::OvalMapped: {
        const cplx z(c.y * std::cos(c.x), c.y * std::sin(c.x));
        const cplx w = map_->forward(z);
        return {w.real(), w.imag()};
    }
    default:
        return c;
    }
}

Vec2 Grid2D::to_computational(Vec2 p) const {
    switch (kind_) {
    case GridKind::DiskPolar:
    case GridKind::OvalMapped: {
        const cplx z = map_->inverse(cplx(p.x, p.y));
        double th = std::atan2(z.imag(), z.real());
        if (th < 0) th += 2.0 * M_PI;
        return {th, std::abs(z)};
    }
    default:
        return p;
    }
}

Vec2 Grid2D::pos(std::size_t k) const {
    if (kind_ == GridKind::Torus || kind_ == GridKind::Cartesian) return comp(k);
    return to_physical(comp(k));
}

double Grid2D::conformal(std::size_t k) const { return conformal_[k]; }

double Grid2D::jacobian(std::size_t k) const {
    if (kind_ == GridKind::DiskPolar || kind_ == GridKind::OvalMapped)
        return row(k) * dy_ * conformal_[k];
    return 1.0;
}

NodeRole Grid2D::role(std::size_t k) const {
    switch (kind_) {
    case GridKind::DiskPolar:
    case GridKind::OvalMapped:
        return row(k) == ny_ - 1 ? NodeRole::Boundary : NodeRole::Interior;
    case GridKind::Torus:
        return NodeRole::Interior;
    case GridKind::Cartesian: {
        const int j = row(k), i = col(k);
        const bool rim = (i == 0 || i == nx_ - 1 || j == 0 || j == ny_ - 1);
        return rim ? NodeRole::Boundary : NodeRole::Interior;
    }
    }
    return NodeRole::Interior;
}

int Grid2D::boundary_distance(std::size_t k) const {
    switch (kind_) {
    case GridKind::DiskPolar:
    case GridKind::OvalMapped:
        return (ny_ - 1) - row(k);
    case GridKind::Torus:
        return std::max(nx_, ny_);
    case GridKind::Cartesian: {
        const int j = row(k), i = col(k);
        return std::min(std::min(i, nx_ - 1 - i), std::min(j, ny_ - 1 - j));
    }
    }
    return 0;
}

bool Grid2D::same_as(const Grid2D& o) const {
    return kind_ == o.kind_ && nx_ == o.nx_ && ny_ == o.ny_ && q() == o.q() &&
           lo_.x == o.lo_.x && lo_.y == o.lo_.y && hi_.x == o.hi_.x && hi_.y == o.hi_.y;
}

} // namespace ef
