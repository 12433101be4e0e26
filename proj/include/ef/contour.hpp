#pragma once

#include <vector>

#include "ef/field.hpp"

namespace ef {

/// One connected component of a level set, as an ordered closed polyline in
/// physical coordinates (the first vertex is not repeated at the end) with
/// positive orientation and its enclosed area.
struct LevelComponent {
    double level = 0.0;
    std::vector<Vec2> points;
    double enclosed_area = 0.0;
};

/// Marching-squares extraction of all closed components of {f = level},
/// with linear interpolation along cell edges, saddle cells resolved by the
/// bilinear center value, and chaining across periodic seams. Components
/// are returned in physical coordinates, each a simple closed polyline.
///
/// Throws EmptyLevel when the level misses the field range (or no closed
/// component exists) and NearCriticalLevel when any extracted vertex sits
/// where |grad f| < grad_threshold_rel * max|grad f|.
std::vector<LevelComponent> extract_level_components(const ScalarField2D& f, double level,
                                                     double grad_threshold_rel = 1e-3);

/// Signed polygon area (shoelace); positive for counterclockwise loops.
double polygon_signed_area(const std::vector<Vec2>& pts);

/// Even-odd (ray casting) point-in-polygon test; the polyline is treated as
/// closed.
bool point_in_polygon(const std::vector<Vec2>& poly, Vec2 p);

/// Polyline arclength treating the input as a closed loop.
double polygon_perimeter(const std::vector<Vec2>& pts);

} // namespace ef
