#include <doctest.h>

#include <cmath>

#include "ef/field.hpp"

using namespace ef;

namespace {

double weight_sum(const GridPtr& g) {
    double s = 0.0;
    for (std::size_t k = 0; k < g->size(); ++k) s += g->weight(k);
    return s;
}

/// Area enclosed by the oval image of the unit disk: pi * (1 + q^2) /
/// (1 - q^2)^2, from the power-series area formula for the map coefficients.
double oval_area(double q) {
    return M_PI * (1.0 + q * q) / ((1.0 - q * q) * (1.0 - q * q));
}

} // namespace

TEST_SUITE("grid_field") {

    TEST_CASE("disk quadrature weights add up to the exact disk area") {
        const auto g = Grid2D::disk(48, 96);
        CHECK(weight_sum(g) == doctest::Approx(M_PI).epsilon(1e-13));
    }

    TEST_CASE("oval quadrature weights converge to the oval area") {
        const double q = 0.5;
        const double exact = oval_area(q);
        const double e1 = std::abs(weight_sum(Grid2D::oval(q, 32, 64)) - exact);
        const double e2 = std::abs(weight_sum(Grid2D::oval(q, 64, 128)) - exact);
        CHECK(e2 / exact < 2e-3);
        CHECK(e1 / e2 > 2.5); // second-order quadrature
    }

    TEST_CASE("torus and cartesian weights are exact") {
        CHECK(weight_sum(Grid2D::torus(32, 48)) ==
              doctest::Approx(4.0 * M_PI * M_PI).epsilon(1e-13));
        CHECK(weight_sum(Grid2D::cartesian(17, 33, {0.0, 0.0}, {1.0, 2.0})) ==
              doctest::Approx(2.0).epsilon(1e-13));
    }

    TEST_CASE("index wrapping follows the grid topology") {
        const auto d = Grid2D::disk(16, 32);
        CHECK(d->index(3, -1) == d->index(3, 31));
        CHECK(d->index(3, 32) == d->index(3, 0));
        CHECK(d->wrap_row(17) == 17); // radial direction does not wrap
        const auto t = Grid2D::torus(16, 16);
        CHECK(t->wrap_row(-1) == 15);
        CHECK(t->wrap_row(16) == 0);
        const auto c = Grid2D::cartesian(16, 16, {0, 0}, {1, 1});
        CHECK(c->wrap_col(5) == 5);
    }

    TEST_CASE("roles and boundary distances") {
        const auto d = Grid2D::disk(16, 32);
        CHECK(d->role(d->index(16, 5)) == NodeRole::Boundary);
        CHECK(d->role(d->index(0, 0)) == NodeRole::Interior);
        CHECK(d->boundary_distance(d->index(4, 7)) == 12);
        const auto t = Grid2D::torus(16, 16);
        for (std::size_t k = 0; k < t->size(); ++k) CHECK(!t->is_boundary(k));
        const auto c = Grid2D::cartesian(16, 16, {0, 0}, {1, 1});
        CHECK(c->is_boundary(c->index(0, 7)));
        CHECK(c->boundary_distance(c->index(3, 8)) == 3);
    }

    TEST_CASE("grid constructors validate their arguments") {
        CHECK_THROWS_AS((void)Grid2D::disk(8, 64), Error);
        CHECK_THROWS_AS((void)Grid2D::oval(0.5, 32, 33), Error); // odd theta count
        CHECK_THROWS_AS((void)Grid2D::torus(8, 32), Error);
        CHECK_THROWS_AS((void)Grid2D::cartesian(32, 32, {0, 0}, {0, 1}), Error);
        CHECK_THROWS_AS((void)Grid2D::oval(1.2, 32, 64), Error);
    }

    TEST_CASE("sampling keeps the polar origin row constant") {
        const auto g = Grid2D::oval(0.4, 24, 48);
        const auto f = sample(g, [](double x, double y) { return x * x - 3.0 * y; });
        for (int i = 1; i < g->nx(); ++i) CHECK(f.at(0, i) == f.at(0, 0));
        CHECK(g->pos(g->index(0, 3)).norm() == 0.0); // origin maps to w = 0
    }

    TEST_CASE("physical norms use the quadrature weights") {
        const auto t = Grid2D::torus(32, 32);
        ScalarField2D one(t, 1.0);
        CHECK(one.l2() == doctest::Approx(2.0 * M_PI).epsilon(1e-13));
        CHECK(one.inner(one) == doctest::Approx(4.0 * M_PI * M_PI).epsilon(1e-13));
        CHECK(one.linf() == 1.0);

        const auto d = Grid2D::disk(24, 48);
        ScalarField2D dn(d, 1.0);
        CHECK(dn.l2() == doctest::Approx(std::sqrt(M_PI)).epsilon(1e-13));
        // Collar exclusion drops the outermost rings.
        CHECK(dn.l2(2) < dn.l2());
    }

    TEST_CASE("field arithmetic and grid mismatch detection") {
        const auto t = Grid2D::torus(16, 16);
        const auto f = sample(t, [](double x, double) { return std::sin(x); });
        auto gfd = 2.0 * f;
        gfd -= f;
        double worst = 0.0;
        for (std::size_t k = 0; k < t->size(); ++k) worst = std::max(worst, std::abs(gfd[k] - f[k]));
        CHECK(worst == 0.0);

        const auto t2 = Grid2D::torus(16, 32);
        ScalarField2D other(t2);
        CHECK_THROWS_AS(check_same_grid(f, other, "test"), Error);
    }

    TEST_CASE("conformal factor and jacobian agree with the map") {
        const double q = 0.5;
        const auto g = Grid2D::oval(q, 24, 48);
        const ConformalOvalMap m(q);
        const std::size_t k = g->index(12, 7);
        const Vec2 c = g->comp(k);
        const cplx z(c.y * std::cos(c.x), c.y * std::sin(c.x));
        CHECK(g->conformal(k) == doctest::Approx(std::norm(m.derivative(z))).epsilon(1e-14));
        CHECK(g->jacobian(k) == doctest::Approx(c.y * std::norm(m.derivative(z))).epsilon(1e-14));
        CHECK(g->jacobian(g->index(0, 0)) == 0.0);
    }

} // TEST_SUITE
