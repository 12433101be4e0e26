#include <cmath>
#include <random>

#include "doctest.h"
#include "ef/interp.hpp"
#include "ef/elliptic.hpp"
#include "ef/ops.hpp"
#include "ef/oval.hpp"
#include "ef/oval_map.hpp"

using namespace ef;

namespace {

// Stationary-point abscissa of the base stream at q = 0.5: the disk point
// sqrt(2/7) pushed through the map, n * 7/6.
constexpr double kX05 = 0.6236095644623236;

// Exact stationary values at q = 0.5: saddle -1/3 at the origin, minima
// -25/72; their gap is 1/72.
constexpr double kSaddleValue = -1.0 / 3.0;
constexpr double kMinValue = -25.0 / 72.0;

const CriticalPoint* find_near(const MorseReport& rep, Vec2 p, double tol) {
    for (const auto& cp : rep.points)
        if ((cp.location - p).norm() < tol) return &cp;
    return nullptr;
}

} // namespace

TEST_SUITE("oval") {

TEST_CASE("base stream at q=0 is the radial Poisson solution") {
    const auto g = Grid2D::disk(48, 96);
    const ScalarField2D psi = oval_base_stream(g);
    const ScalarField2D exact =
        sample(g, [](double x, double y) { return (x * x + y * y - 1.0) / 4.0; });
    ScalarField2D d = psi;
    d -= exact;
    CHECK(d.linf() < 1e-14);
}

TEST_CASE("base stream vanishes on the boundary and has unit laplacian") {
    const auto lap_err = [](int nr) {
        const auto g = Grid2D::oval(0.5, nr, 2 * nr);
        const ScalarField2D psi = oval_base_stream(g);
        double bmax = 0.0;
        for (std::size_t k = 0; k < g->size(); ++k)
            if (g->is_boundary(k)) bmax = std::max(bmax, std::abs(psi[k]));
        CHECK(bmax < 1e-13);
        ScalarField2D lap = ops::laplacian(psi);
        for (std::size_t k = 0; k < g->size(); ++k) lap[k] -= 1.0;
        return lap.linf(2);
    };
    const double e64 = lap_err(64);
    const double e128 = lap_err(128);
    CHECK(e128 < 5e-3);
    CHECK(e64 / e128 > 3.0);
    CHECK(e64 / e128 < 5.5);
}

TEST_CASE("base stream is symmetric in x and y to rounding") {
    const auto g = Grid2D::oval(0.5, 48, 96);
    const ScalarField2D psi = oval_base_stream(g);
    const int nx = g->nx();
    double worst = 0.0;
    for (int j = 0; j < g->ny(); ++j)
        for (int i = 0; i < nx; ++i) {
            const double v = psi.at(j, i);
            // theta -> pi - theta is x -> -x; theta -> -theta is y -> -y.
            const int ix = ((nx / 2 - i) % nx + nx) % nx;
            const int iy = (nx - i) % nx;
            worst = std::max(worst, std::abs(v - psi.at(j, ix)));
            worst = std::max(worst, std::abs(v - psi.at(j, iy)));
        }
    CHECK(worst < 1e-14);
}

TEST_CASE("exact stationary values at q=0.5") {
    CHECK(oval_base_stream_at(0.5, 0.0, 0.0) == doctest::Approx(kSaddleValue).epsilon(1e-14));
    CHECK(oval_base_stream_at(0.5, kX05, 0.0) == doctest::Approx(kMinValue).epsilon(1e-14));
    // The off-origin points are genuine zeros of the radial derivative.
    const auto dpsi = [](double X) {
        const double h = 1e-6;
        return (oval_base_stream_at(0.5, X + h, 0.0) - oval_base_stream_at(0.5, X - h, 0.0)) /
               (2 * h);
    };
    CHECK(std::abs(dpsi(kX05)) < 1e-9);
    CHECK(std::abs(dpsi(0.4744)) > 1e-3);  // not a stationary point
    CHECK(std::abs(dpsi(0.5345)) > 1e-3);  // disk-frame abscissa, not physical
}

TEST_CASE("stationary point list switches regime at the known threshold") {
    CHECK(oval_critical_points(0.40).size() == 1);
    CHECK(oval_critical_points(0.4142).size() == 1);
    const auto pts = oval_critical_points(0.5);
    REQUIRE(pts.size() == 3);
    CHECK(pts[0].norm() == 0.0);
    CHECK(pts[1].x == doctest::Approx(kX05).epsilon(1e-12));
    CHECK(pts[2].x == doctest::Approx(-kX05).epsilon(1e-12));
    CHECK(oval_critical_points(0.4143).size() == 3);
    // Just above threshold the new points emerge from the origin.
    CHECK(std::abs(oval_critical_points(0.4143)[1].x) < 0.05);
    CHECK_THROWS_AS(oval_critical_points(1.2), Error);
}

TEST_CASE("morse classification of a paraboloid") {
    const auto g = Grid2D::cartesian(64, 64, {-1, -1}, {1, 1});
    const ScalarField2D f = sample(g, [](double x, double y) { return x * x + y * y; });
    const auto rep = morse_classify(f);
    REQUIRE(rep.points.size() == 1);
    CHECK(rep.is_morse);
    CHECK(rep.points[0].kind == CriticalKind::Minimum);
    CHECK(rep.points[0].location.norm() < 1e-8);
    CHECK(rep.points[0].sign_low == 1);
    CHECK(rep.points[0].sign_high == 1);
}

TEST_CASE("morse classification of the cellular field on the torus") {
    const auto g = Grid2D::torus(64, 64);
    const ScalarField2D f =
        sample(g, [](double x, double y) { return std::sin(x) * std::sin(y); });
    const auto rep = morse_classify(f);
    CHECK(rep.is_morse);
    REQUIRE(rep.points.size() == 8);
    int mins = 0, maxs = 0, saddles = 0;
    for (const auto& cp : rep.points) {
        if (cp.kind == CriticalKind::Minimum) ++mins;
        if (cp.kind == CriticalKind::Maximum) ++maxs;
        if (cp.kind == CriticalKind::Saddle) ++saddles;
    }
    CHECK(mins == 2);
    CHECK(maxs == 2);
    CHECK(saddles == 4);
    const auto* mx = find_near(rep, {M_PI / 2, M_PI / 2}, 1e-6);
    REQUIRE(mx != nullptr);
    CHECK(mx->kind == CriticalKind::Maximum);
    CHECK(mx->value == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("morse classification of the base stream at q=0.5") {
    const auto g = Grid2D::oval(0.5, 128, 256);
    const ScalarField2D psi = oval_base_stream(g);
    const auto rep = morse_classify(psi);
    REQUIRE(rep.points.size() == 3);
    CHECK(rep.is_morse);
    CHECK(rep.unresolved_seeds == 0);

    const auto& origin = rep.points[0];
    CHECK(origin.location.norm() < 1e-5);
    CHECK(origin.kind == CriticalKind::Saddle);
    CHECK(origin.sign_low == -1);
    CHECK(origin.sign_high == 1);
    CHECK(origin.value == doctest::Approx(kSaddleValue).epsilon(1e-8));

    const auto exact = oval_critical_points(0.5);
    for (int s = 1; s <= 2; ++s) {
        const auto* cp = find_near(rep, exact[s], 2e-3);
        REQUIRE(cp != nullptr);
        CHECK(cp->kind == CriticalKind::Minimum);
        CHECK(cp->value == doctest::Approx(kMinValue).epsilon(1e-6));
    }
}

TEST_CASE("origin hessian eigen-signs follow the sign law across q") {
    for (const double q : {0.40, 0.45, 0.50, 0.60, 0.70}) {
        CAPTURE(q);
        const auto g = Grid2D::oval(q, 96, 192);
        const auto rep = morse_classify(oval_base_stream(g));
        const auto* origin = find_near(rep, {0, 0}, 1e-4);
        REQUIRE(origin != nullptr);
        const int s1 = (1 - q * q - 2 * q) > 0 ? 1 : -1;
        const int s2 = (1 - q * q + 2 * q) > 0 ? 1 : -1;
        CHECK(origin->sign_low == std::min(s1, s2));
        CHECK(origin->sign_high == std::max(s1, s2));
        if (q < 0.4142) {
            CHECK(rep.points.size() == 1);
            CHECK(origin->kind == CriticalKind::Minimum);
        } else {
            CHECK(rep.points.size() == 3);
            CHECK(origin->kind == CriticalKind::Saddle);
        }
    }
}

TEST_CASE("semilinear solve at lambda=0 returns the base state unchanged") {
    const auto g = Grid2D::oval(0.5, 48, 96);
    int iters = -1;
    const ScalarField2D psi = solve_semilinear(g, 0.0, 1e-12, &iters);
    CHECK(iters == 0);
    const ScalarField2D base = oval_base_stream(g);
    ScalarField2D d = psi;
    d -= base;
    CHECK(d.linf() == 0.0);
}

TEST_CASE("semilinear solve converges at lambda=0.1 with controlled distance") {
    const auto g = Grid2D::oval(0.5, 96, 192);
    const ScalarField2D base = oval_base_stream(g);
    int iters = 0;
    const ScalarField2D psi = solve_semilinear(g, 0.1, 1e-12, &iters);
    CHECK(iters > 2);

    // PDE residual: laplacian(psi) - 1 - lambda psi should only carry the
    // base field's own discretization error plus solver tolerance.
    ScalarField2D res = ops::laplacian(psi);
    par::for_each(static_cast<std::int64_t>(g->size()),
                  [&](std::int64_t k) { res[k] -= 1.0 + 0.1 * psi[k]; });
    ScalarField2D base_res = ops::laplacian(base);
    for (std::size_t k = 0; k < g->size(); ++k) base_res[k] -= 1.0;
    CHECK(res.linf(2) <= base_res.linf(2) * (1 + 1e-6) + 1e-8);

    // Contraction-constant bound: ||psi - base|| <= l ||inv(L) base|| / (1 - l M)
    // with M = ||inv(L) 1|| = max |base|.
    const ScalarField2D lift = solve_dirichlet(EllipticProblem::dirichlet(g), base);
    const double bound = 0.1 * lift.linf() / (1.0 - 0.1 * base.linf());
    ScalarField2D d = psi;
    d -= base;
    CHECK(d.linf() <= bound * (1 + 1e-10));
    CHECK(d.linf() > 0.0);

    // Still a Morse function with three stationary points near the base ones.
    const auto rep = morse_classify(psi);
    REQUIRE(rep.points.size() == 3);
    CHECK(rep.is_morse);
    for (const auto& p : oval_critical_points(0.5)) CHECK(find_near(rep, p, 0.05) != nullptr);
}

TEST_CASE("semilinear solve rejects non-contracting lambda") {
    const auto g = Grid2D::oval(0.5, 32, 64);
    CHECK_THROWS_AS(solve_semilinear(g, 20.0), NonContraction);
    CHECK_THROWS_AS(solve_semilinear(g, -0.1), Error);
}

TEST_CASE("map injectivity probe with the proof's separation constant") {
    for (const double q : {0.3, 0.5, 0.8}) {
        CAPTURE(q);
        const ConformalOvalMap map(q);
        const double c = (1 - q) / ((1 + q) * (1 + q));
        std::mt19937_64 rng(2026);
        std::uniform_real_distribution<double> ur(0.0, 0.999), ut(0.0, 2 * M_PI);
        double worst = 1e300;
        for (int t = 0; t < 10000; ++t) {
            const double r1 = ur(rng), th1 = ut(rng), r2 = ur(rng), th2 = ut(rng);
            const cplx z1 = r1 * std::exp(cplx(0, th1)), z2 = r2 * std::exp(cplx(0, th2));
            if (std::abs(z1 - z2) < 1e-12) continue;
            worst = std::min(worst, std::abs(map.forward(z1) - map.forward(z2)) /
                                        std::abs(z1 - z2));
        }
        CHECK(worst >= c * (1 - 1e-12));
    }
}

} // TEST_SUITE
