#pragma once

#include <functional>
#include <limits>
#include <utility>
#include <vector>

namespace ef {

/// A twice-differentiable scalar function of one variable with an optional
/// declared support interval and an optional smoothing scale. Used for the
/// vorticity laws F, forcing shapes G, and their flattened variants.
class Profile {
public:
    Profile(); ///< identically zero

    double operator()(double t) const { return f0_(t); }
    double d1(double t) const { return f1_(t); }
    double d2(double t) const { return f2_(t); }

    /// Declared support [lo, hi]; +-infinity when unbounded.
    std::pair<double, double> support() const { return {lo_, hi_}; }
    /// Width of the smoothing kernel baked into the evaluation (0 if none).
    double mollification_scale() const { return moll_; }
    /// True for exactly-affine profiles a + b t.
    bool is_affine() const { return affine_; }
    double affine_offset() const { return a_; }
    double affine_slope() const { return b_; }

    /// a + b t on the whole line.
    static Profile affine(double a, double b);

    /// Compact C^2 bump amplitude * (1 - s^2)^3 with s = (t - center)/half_width,
    /// zero for |s| >= 1. Peak value `amplitude` at t = center.
    static Profile bump(double center, double half_width, double amplitude = 1.0);

    /// Arbitrary triple of callables (value, first, second derivative) with
    /// an optional declared support interval.
    static Profile custom(std::function<double(double)> f,
                          std::function<double(double)> df,
                          std::function<double(double)> ddf,
                          double support_lo = -std::numeric_limits<double>::infinity(),
                          double support_hi = std::numeric_limits<double>::infinity());

    /// This profile multiplied by a constant.
    Profile scaled(double factor) const;

    /// This profile read in normalized coordinates: result(t) = (*this)((t-center)/half_width).
    /// Derivatives pick up the 1/half_width factors; a bounded support interval
    /// is rescaled accordingly.
    Profile rescaled(double center, double half_width) const;

private:
    friend Profile flatten_profile(const Profile&, std::vector<double>, double);

    std::function<double(double)> f0_, f1_, f2_;
    double lo_, hi_;     ///< declared support
    double moll_ = 0.0;  ///< smoothing scale
    bool affine_ = false;
    double a_ = 0.0, b_ = 0.0; ///< coefficients when affine_
};

/// Replaces F on the windows |t - t_i| <= delta around each given value by the
/// chord through the window endpoints, extends F linearly outside the spanned
/// value range [min t_i, max t_i] (when that range is nondegenerate), and
/// smooths the resulting kinks with a compact polynomial kernel of width
/// delta^2. The result is C^2 with vanishing second derivative on
/// |t - t_i| <= delta - delta^2, differs from F by O(delta^2) on the original
/// range, and preserves strict monotonicity. Affine inputs are returned
/// unchanged. Throws OverlappingWindows when two values lie closer than
/// 2*delta, Error for nonpositive or too-large delta.
Profile flatten_profile(const Profile& F, std::vector<double> critical_values, double delta);

} // namespace ef
