#include <cmath>
#include <limits>

#include "doctest.h"
#include "ef/common.hpp"
#include "ef/profile.hpp"

using namespace ef;

namespace {

Profile quadratic() {
    return Profile::custom([](double t) { return t * t; },
                           [](double t) { return 2.0 * t; },
                           [](double) { return 2.0; });
}

/// Largest deviation |G - F| sampled densely on [lo, hi].
double max_deviation(const Profile& G, const Profile& F, double lo, double hi) {
    double worst = 0.0;
    const int n = 801;
    for (int i = 0; i <= n; ++i) {
        const double t = lo + (hi - lo) * i / n;
        worst = std::max(worst, std::abs(G(t) - F(t)));
    }
    return worst;
}

} // namespace

TEST_SUITE("profile") {

TEST_CASE("affine profiles expose their coefficients") {
    const Profile F = Profile::affine(2.0, 3.0);
    CHECK(F.is_affine());
    CHECK(F.affine_offset() == doctest::Approx(2.0));
    CHECK(F.affine_slope() == doctest::Approx(3.0));
    CHECK(F(0.0) == doctest::Approx(2.0));
    CHECK(F(1.0) == doctest::Approx(5.0));
    CHECK(F.d1(-7.3) == doctest::Approx(3.0));
    CHECK(F.d2(0.4) == 0.0);
    CHECK(F.support().first == -std::numeric_limits<double>::infinity());
    CHECK(F.support().second == std::numeric_limits<double>::infinity());
    CHECK(F.mollification_scale() == 0.0);
}

TEST_CASE("compact bump values, derivatives, and support") {
    const Profile B = Profile::bump(0.0, 1.0);
    // (1 - t^2)^3 at t = 0, 0.5, 1, and outside.
    CHECK(B(0.0) == doctest::Approx(1.0));
    CHECK(B(0.5) == doctest::Approx(0.421875));
    CHECK(B(1.0) == 0.0);
    CHECK(B(1.2) == 0.0);
    CHECK(B(-1.2) == 0.0);
    // d/dt = -6 t (1 - t^2)^2, d2/dt2 = 6 (1 - t^2)(5 t^2 - 1).
    CHECK(B.d1(0.0) == 0.0);
    CHECK(B.d1(0.5) == doctest::Approx(-1.6875));
    CHECK(B.d2(0.0) == doctest::Approx(-6.0));
    CHECK(B.d2(0.5) == doctest::Approx(1.125));
    CHECK(B.support().first == doctest::Approx(-1.0));
    CHECK(B.support().second == doctest::Approx(1.0));
    CHECK_FALSE(B.is_affine());

    const Profile S = Profile::bump(2.0, 0.5, 3.0);
    CHECK(S(2.0) == doctest::Approx(3.0));
    CHECK(S(2.25) == doctest::Approx(3.0 * 0.421875));
    CHECK(S(2.6) == 0.0);
    CHECK(S.d2(2.0) == doctest::Approx(-6.0 * 3.0 / 0.25));
    CHECK(S.support().first == doctest::Approx(1.5));
    CHECK(S.support().second == doctest::Approx(2.5));
}

TEST_CASE("bump derivatives agree with finite differences") {
    const Profile B = Profile::bump(0.3, 0.7, 2.0);
    const double h = 1e-5;
    for (double t : {0.0, 0.2, 0.31, 0.55, 0.9}) {
        const double fd1 = (B(t + h) - B(t - h)) / (2.0 * h);
        const double fd2 = (B(t + h) - 2.0 * B(t) + B(t - h)) / (h * h);
        CHECK(B.d1(t) == doctest::Approx(fd1).epsilon(1e-6));
        CHECK(B.d2(t) == doctest::Approx(fd2).epsilon(1e-4));
    }
}

TEST_CASE("rescaled reads the template in normalized coordinates") {
    const Profile G = Profile::bump(0.0, 1.0).rescaled(0.3, 0.2);
    CHECK(G(0.3) == doctest::Approx(1.0));
    CHECK(G(0.4) == doctest::Approx(0.421875));
    CHECK(G(0.55) == 0.0);
    CHECK(G.d1(0.4) == doctest::Approx(-1.6875 / 0.2));
    CHECK(G.d2(0.3) == doctest::Approx(-6.0 / 0.04));
    CHECK(G.support().first == doctest::Approx(0.1));
    CHECK(G.support().second == doctest::Approx(0.5));

    // Affine profiles stay affine under rescaling.
    const Profile A = Profile::affine(2.0, 3.0).rescaled(1.0, 0.5);
    CHECK(A.is_affine());
    CHECK(A(2.0) == doctest::Approx(8.0));
    CHECK(A.affine_slope() == doctest::Approx(6.0));
    CHECK(A.affine_offset() == doctest::Approx(-4.0));
}

TEST_CASE("scaled multiplies values and derivatives") {
    const Profile S = Profile::bump(0.0, 1.0).scaled(2.5);
    CHECK(S(0.0) == doctest::Approx(2.5));
    CHECK(S.d2(0.0) == doctest::Approx(-15.0));
    CHECK(S.support().second == doctest::Approx(1.0));
    const Profile A = Profile::affine(1.0, 2.0).scaled(-1.0);
    CHECK(A.is_affine());
    CHECK(A.affine_slope() == doctest::Approx(-2.0));
}

TEST_CASE("custom profiles carry a declared support") {
    const Profile P = Profile::custom([](double t) { return std::sin(t); },
                                      [](double t) { return std::cos(t); },
                                      [](double t) { return -std::sin(t); },
                                      0.0, 3.0);
    CHECK(P.support().first == doctest::Approx(0.0));
    CHECK(P.support().second == doctest::Approx(3.0));
    CHECK(P(1.0) == doctest::Approx(std::sin(1.0)));
}

TEST_CASE("flattening validates its inputs") {
    const Profile F = quadratic();
    CHECK_THROWS_AS(flatten_profile(F, {0.0}, 0.0), Error);
    CHECK_THROWS_AS(flatten_profile(F, {0.0}, -0.1), Error);
    CHECK_THROWS_AS(flatten_profile(F, {0.0}, 0.3), Error);
    CHECK_THROWS_AS(flatten_profile(F, {}, 0.1), Error);
    CHECK_THROWS_AS(flatten_profile(F, {0.0, 0.15}, 0.1), OverlappingWindows);
    CHECK_THROWS_AS(flatten_profile(F, {0.5, 0.5}, 0.05), OverlappingWindows);
}

TEST_CASE("flattening leaves affine profiles unchanged") {
    const Profile F = Profile::affine(1.0, 0.1);
    const Profile G = flatten_profile(F, {0.0}, 0.1);
    CHECK(G.is_affine());
    CHECK(G(3.0) == doctest::Approx(1.3));
    CHECK(G.d1(-2.0) == doctest::Approx(0.1));
}

TEST_CASE("flattening a quadratic at its critical value") {
    const double delta = 0.1;
    const Profile G = flatten_profile(quadratic(), {0.0}, delta);
    CHECK(G.mollification_scale() == doctest::Approx(delta * delta));

    // Inside the window the chord through (+-delta, delta^2) is the constant
    // delta^2; away from the kinks by the smoothing width the value is exact.
    CHECK(G(0.0) == doctest::Approx(0.01).epsilon(1e-12));
    CHECK(G(0.05) == doctest::Approx(0.01).epsilon(1e-12));
    CHECK(G(-0.07) == doctest::Approx(0.01).epsilon(1e-12));
    CHECK(std::abs(G.d1(0.04)) < 1e-10);
    CHECK(std::abs(G.d2(0.0)) < 1e-8);
    CHECK(std::abs(G.d2(0.05)) < 1e-8);

    // Far from the window the smoothing adds exactly (scale^2 / 9) f''/2 * 2.
    const double eps = delta * delta;
    CHECK(G(1.0) == doctest::Approx(1.0 + eps * eps / 9.0).epsilon(1e-12));
    CHECK(G(-0.8) == doctest::Approx(0.64 + eps * eps / 9.0).epsilon(1e-12));
    CHECK(G.d1(1.0) == doctest::Approx(2.0).epsilon(1e-10));
    CHECK(G.d2(1.0) == doctest::Approx(2.0).epsilon(1e-7));

    // The transition layer is still C2: finite differences track d1 and d2.
    for (double t : {0.095, 0.105, -0.0985}) {
        const double h = 1e-4;
        const double fd1 = (G(t + h) - G(t - h)) / (2.0 * h);
        CHECK(std::abs(G.d1(t) - fd1) < 1e-4);
    }
}

TEST_CASE("flattening deviation scales like the window width squared") {
    const Profile F = quadratic();
    const double g1 = max_deviation(flatten_profile(F, {0.0}, 0.1), F, -0.3, 0.3);
    const double g2 = max_deviation(flatten_profile(F, {0.0}, 0.05), F, -0.3, 0.3);
    CHECK(g1 == doctest::Approx(0.01).epsilon(0.05));
    const double ratio = g1 / g2;
    CHECK(ratio > 3.2);
    CHECK(ratio < 4.8);
}

TEST_CASE("flattening preserves strict monotonicity") {
    const Profile F = Profile::custom([](double t) { return t + t * t * t / 3.0; },
                                      [](double t) { return 1.0 + t * t; },
                                      [](double t) { return 2.0 * t; });
    const Profile G = flatten_profile(F, {0.5}, 0.1);
    for (int i = 0; i <= 600; ++i) {
        const double t = -1.0 + 3.0 * i / 600.0;
        CHECK(G.d1(t) > 0.0);
    }
    // Window interior becomes affine with the chord slope.
    const double chord = (F(0.6) - F(0.4)) / 0.2;
    CHECK(G.d1(0.5) == doctest::Approx(chord).epsilon(1e-10));
    CHECK(std::abs(G.d2(0.5)) < 1e-8);
    CHECK(G(0.5) == doctest::Approx(0.5 * (F(0.6) + F(0.4))).epsilon(1e-12));
}

TEST_CASE("two windows with a linear extension beyond the value range") {
    const double delta = 0.05;
    const Profile G = flatten_profile(quadratic(), {-1.0, 1.0}, delta);

    // Outside [-1, 1] the profile continues with the edge slopes +-2.
    CHECK(G(1.5) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(G(-1.5) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(G.d1(1.5) == doctest::Approx(2.0).epsilon(1e-10));
    CHECK(std::abs(G.d2(1.5)) < 1e-7);
    CHECK(G(3.0) == doctest::Approx(5.0).epsilon(1e-12));

    // At the window center the chord mixes the parabola with the extension.
    const double inner = 0.95 * 0.95;          // F(1 - delta)
    const double outer = 1.0 + 2.0 * delta;    // extension at 1 + delta
    CHECK(G(1.0) == doctest::Approx(0.5 * (inner + outer)).epsilon(1e-12));
    CHECK(std::abs(G.d2(1.0)) < 1e-7);

    // Far from both windows only the quadratic smoothing correction remains.
    const double eps = delta * delta;
    CHECK(G(0.0) == doctest::Approx(eps * eps / 9.0).epsilon(1e-6));
    CHECK(G(0.3) == doctest::Approx(0.09 + eps * eps / 9.0).epsilon(1e-12));
}

} // TEST_SUITE
