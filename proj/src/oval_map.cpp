#include "ef/oval_map.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace ef {

namespace {
constexpr double kPoleGuard = 1e-9;        // |1 - q z^2| below this is a pole hit
constexpr double kOriginBranch = 1e-10;    // |w| below this returns z = 0 exactly
constexpr double kRoundTripTol = 1e-9;     // relative round-trip acceptance
} // namespace

ConformalOvalMap::ConformalOvalMap(double q) : q_(q) {
    if (!(q >= 0.0) || q >= 1.0)
        throw Error("ConformalOvalMap: q must lie in [0, 1), got " + std::to_string(q));
}

cplx ConformalOvalMap::forward(cplx z) const {
    if (q_ == 0.0) return z;
    const cplx den = 1.0 - q_ * z * z;
    if (std::abs(den) < kPoleGuard)
        throw PoleProximity("forward map near pole, |1 - q z^2| = " +
                            std::to_string(std::abs(den)) + " at z = (" +
                            std::to_string(z.real()) + ", " + std::to_string(z.imag()) + ")");
    return z / den;
}

cplx ConformalOvalMap::inverse(cplx w) const {
    if (q_ == 0.0) return w;
    if (std::abs(w) < kOriginBranch) return cplx(0.0, 0.0);
    // Principal branch; on the closed oval 1 + 4 q w^2 stays away from the
    // negative real axis (the branch cut is only reached beyond the oval on
    // the imaginary axis), so sqrt is smooth where it matters.
    const cplx s = std::sqrt(1.0 + 4.0 * q_ * w * w);
    const cplx z = 2.0 * w / (1.0 + s);
    const double tol = kRoundTripTol * std::max(1.0, std::abs(w));
    if (std::abs(z) > 1.0 + kRoundTripTol || std::abs(forward(z) - w) > tol)
        throw OutsideDomain("inverse map: w = (" + std::to_string(w.real()) + ", " +
                            std::to_string(w.imag()) + ") is not in the closed oval (|z| = " +
                            std::to_string(std::abs(z)) + ")");
    return z;
}

cplx ConformalOvalMap::derivative(cplx z) const {
    if (q_ == 0.0) return 1.0;
    const cplx den = 1.0 - q_ * z * z;
    if (std::abs(den) < kPoleGuard)
        throw PoleProximity("derivative near pole at z = (" + std::to_string(z.real()) + ", " +
                            std::to_string(z.imag()) + ")");
    return (1.0 + q_ * z * z) / (den * den);
}

double ConformalOvalMap::min_boundary_modulus(int samples) const {
    double m = std::abs(forward(cplx(0.0, 1.0))); // exact minimizer theta = pi/2
    for (int i = 0; i < samples; ++i) {
        const double th = 2.0 * M_PI * i / samples;
        m = std::min(m, std::abs(forward(cplx(std::cos(th), std::sin(th)))));
    }
    return m;
}

ConformalOvalMap::UnivalenceReport ConformalOvalMap::check_univalence_convexity(int samples) const {
    samples = std::max(samples, 1000);
    // Split the budget into a (rho, theta) product grid. Cell-centered radii
    // keep the samples strictly interior, where the functional is strictly
    // positive for a univalent map (it degenerates to 0 only at z = ±1).
    const int nr = std::max(8, static_cast<int>(std::sqrt(static_cast<double>(samples) / 4.0)));
    const int nt = (samples + nr - 1) / nr;
    double min_re = 1e300;
    for (int j = 0; j < nr; ++j) {
        const double rho = (j + 0.5) / nr;
        for (int i = 0; i < nt; ++i) {
            const double th = 2.0 * M_PI * i / nt;
            const cplx z = rho * cplx(std::cos(th), std::sin(th));
            min_re = std::min(min_re, (derivative(z) * (1.0 - z * z)).real());
        }
    }
    return UnivalenceReport{min_re, min_boundary_modulus()};
}

} // namespace ef
