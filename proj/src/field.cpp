#include "ef/field.hpp"

#include <algorithm>
#include <cmath>

namespace ef {

double ScalarField2D::linf(int collar) const {
    double m = 0.0;
    for (std::size_t k = 0; k < v_.size(); ++k)
        if (grid_->boundary_distance(k) >= collar) m = std::max(m, std::abs(v_[k]));
    return m;
}

double ScalarField2D::l2(int collar) const { return std::sqrt(inner(*this, collar)); }

double ScalarField2D::inner(const ScalarField2D& g, int collar) const {
    check_same_grid(*this, g, "inner");
    double s = 0.0;
    for (std::size_t k = 0; k < v_.size(); ++k)
        if (grid_->boundary_distance(k) >= collar) s += v_[k] * g.v_[k] * grid_->weight(k);
    return s;
}

ScalarField2D& ScalarField2D::operator+=(const ScalarField2D& o) {
    check_same_grid(*this, o, "operator+=");
    for (std::size_t k = 0; k < v_.size(); ++k) v_[k] += o.v_[k];
    return *this;
}

ScalarField2D& ScalarField2D::operator-=(const ScalarField2D& o) {
    check_same_grid(*this, o, "operator-=");
    for (std::size_t k = 0; k < v_.size(); ++k) v_[k] -= o.v_[k];
    return *this;
}

ScalarField2D& ScalarField2D::operator*=(double s) {
    for (double& x : v_) x *= s;
    return *this;
}

double VectorField2D::max_norm() const {
    double m = 0.0;
    for (std::size_t k = 0; k < vx_.size(); ++k) m = std::max(m, at(k).norm());
    return m;
}

void check_same_grid(const ScalarField2D& a, const ScalarField2D& b, const char* who) {
    if (!a.grid() || !b.grid() || !a.grid()->same_as(*b.grid()))
        throw Error(std::string(who) + ": fields live on different grids");
}

} // namespace ef
