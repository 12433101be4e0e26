#pragma once

#include <cmath>
#include <cstddef>
#include <memory>
#include <optional>
#include <vector>

#include "ef/common.hpp"
#include "ef/oval_map.hpp"

namespace ef {

struct Vec2 {
    double x = 0.0, y = 0.0;

    Vec2() = default;
    Vec2(double x_, double y_) : x(x_), y(y_) {}

    Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    Vec2& operator+=(Vec2 o) {
        x += o.x;
        y += o.y;
        return *this;
    }
    double dot(Vec2 o) const { return x * o.x + y * o.y; }
    double cross(Vec2 o) const { return x * o.y - y * o.x; }
    double norm() const { return std::hypot(x, y); }
    Vec2 perp() const { return {-y, x}; }
};

inline Vec2 operator*(double s, Vec2 v) { return v * s; }

enum class GridKind { DiskPolar, OvalMapped, Torus, Cartesian };

enum class NodeRole : unsigned char { Interior, Boundary, Exterior };

class Grid2D;
using GridPtr = std::shared_ptr<const Grid2D>;

/// Structured 2D grid in one of four flavors.
///
/// DiskPolar / OvalMapped: computational coordinates are polar (r, theta) on
/// the unit disk, r = j*dr for rows j = 0..nr (dr = 1/nr) and theta = i*dt
/// for columns i = 0..ntheta-1 (dt = 2*pi/ntheta, wrapping). Row j = 0 is
/// the origin: its ntheta entries alias one physical point, and fields must
/// be constant along it. Row j = nr is the Dirichlet boundary. For
/// OvalMapped grids the physical position is f_q(r e^{i theta}) and all
/// physical metric quantities carry the conformal factor |f_q'|^2.
///
/// Torus: uniform periodic grid on [-pi, pi)^2, no boundary nodes.
///
/// Cartesian: uniform grid on a rectangle, outermost ring of nodes marked
/// as boundary.
///
/// Node storage is row-major: index k = j*nx() + i.
class Grid2D : public std::enable_shared_from_this<Grid2D> {
public:
    static GridPtr disk(int nr, int ntheta);
    static GridPtr oval(double q, int nr, int ntheta);
    static GridPtr torus(int nx, int ny);
    static GridPtr cartesian(int nx, int ny, Vec2 lo, Vec2 hi);

    GridKind kind() const { return kind_; }
    /// Columns: theta count for polar kinds, x count otherwise.
    int nx() const { return nx_; }
    /// Rows: nr+1 radial nodes for polar kinds, y count otherwise.
    int ny() const { return ny_; }
    std::size_t size() const { return static_cast<std::size_t>(nx_) * ny_; }

    /// Computational spacings: (dtheta, dr) ordering matches (column, row).
    double dx() const { return dx_; }
    double dy() const { return dy_; }

    /// Radial interval count for polar kinds (ny() - 1).
    int nr() const { return ny_ - 1; }

    std::size_t index(int j, int i) const {
        return static_cast<std::size_t>(j) * nx_ + wrap_col(i);
    }
    int row(std::size_t k) const { return static_cast<int>(k / nx_); }
    int col(std::size_t k) const { return static_cast<int>(k % nx_); }

    /// Column index with periodic wrap where the geometry wraps.
    int wrap_col(int i) const {
        if (kind_ == GridKind::Cartesian) return i;
        i %= nx_;
        return i < 0 ? i + nx_ : i;
    }
    /// Row index with periodic wrap on the torus (identity elsewhere).
    int wrap_row(int j) const {
        if (kind_ != GridKind::Torus) return j;
        j %= ny_;
        return j < 0 ? j + ny_ : j;
    }

    /// Computational coordinates of a node: (theta, r) packed as (x, y) for
    /// polar kinds, physical (x, y) otherwise.
    Vec2 comp(std::size_t k) const;
    /// Physical position of a node.
    Vec2 pos(std::size_t k) const;
    /// Physical position for arbitrary computational coordinates.
    Vec2 to_physical(Vec2 c) const;
    /// Computational coordinates of an arbitrary physical point (polar kinds
    /// invert the conformal map; theta is reduced to [0, 2*pi)).
    Vec2 to_computational(Vec2 p) const;

    /// |f_q'(z)|^2 at the node (1 away from oval grids).
    double conformal(std::size_t k) const;
    /// Physical area element per unit computational area at the node:
    /// r*|f'|^2 for polar kinds (0 at the origin row), 1 otherwise.
    double jacobian(std::size_t k) const;
    /// Physical quadrature weight (exact cell areas; the origin cell of
    /// polar grids is split evenly across its nx() aliased entries).
    double weight(std::size_t k) const { return weight_[k]; }

    NodeRole role(std::size_t k) const;
    bool is_boundary(std::size_t k) const { return role(k) == NodeRole::Boundary; }
    /// Distance to the closest boundary node, in grid cells (a large value
    /// on the torus, which has none).
    int boundary_distance(std::size_t k) const;

    /// Conformal map for OvalMapped grids, null otherwise.
    const ConformalOvalMap* map() const { return map_ ? &*map_ : nullptr; }
    double q() const { return map_ ? map_->q() : 0.0; }

    Vec2 lo() const { return lo_; }
    Vec2 hi() const { return hi_; }

    bool same_as(const Grid2D& o) const;

private:
    Grid2D() = default;
    void finalize();

    GridKind kind_ = GridKind::Cartesian;
    int nx_ = 0, ny_ = 0;
    double dx_ = 0.0, dy_ = 0.0;
    Vec2 lo_{}, hi_{};
    std::optional<ConformalOvalMap> map_;
    std::vector<double> weight_;
    std::vector<double> conformal_;
};

} // namespace ef
