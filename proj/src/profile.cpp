#include "ef/profile.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>

#include "ef/common.hpp"

namespace ef {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Compact unit-mass kernel (35/32)(1-u^2)^3 on [-1,1] and its derivatives.
double kern0(double u) {
    if (std::abs(u) >= 1.0) return 0.0;
    const double m = 1.0 - u * u;
    return (35.0 / 32.0) * m * m * m;
}
double kern1(double u) {
    if (std::abs(u) >= 1.0) return 0.0;
    const double m = 1.0 - u * u;
    return -(105.0 / 16.0) * u * m * m;
}
double kern2(double u) {
    if (std::abs(u) >= 1.0) return 0.0;
    const double m = 1.0 - u * u;
    return (105.0 / 16.0) * m * (5.0 * u * u - 1.0);
}

struct GaussRule {
    std::vector<double> node, weight; // on [-1, 1]
};

// 64-point Gauss-Legendre rule, nodes by Newton iteration on P_64.
const GaussRule& gauss64() {
    static const GaussRule rule = [] {
        GaussRule r;
        const int n = 64;
        r.node.resize(n);
        r.weight.resize(n);
        for (int i = 0; i < n / 2; ++i) {
            double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
            double dp = 0.0;
            for (int it = 0; it < 100; ++it) {
                double p0 = 1.0, p1 = x;
                for (int k = 2; k <= n; ++k) {
                    const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n * (x * p1 - p0) / (x * x - 1.0);
                const double dx = p1 / dp;
                x -= dx;
                if (std::abs(dx) < 1e-15) break;
            }
            const double w = 2.0 / ((1.0 - x * x) * dp * dp);
            r.node[i] = -x;
            r.node[n - 1 - i] = x;
            r.weight[i] = w;
            r.weight[n - 1 - i] = w;
        }
        return r;
    }();
    return rule;
}

// The pre-smoothing stage of the flattening: chords across the windows
// |t - t_i| <= delta, the original profile между них, linear extensions
// outside the spanned range of window centers (when nondegenerate).
struct FlattenCore {
    Profile F;
    std::vector<double> centers; // sorted
    double delta = 0.0;
    bool extend = false;
    double tlo = 0.0, thi = 0.0;     // range of centers
    double ylo = 0.0, slo = 0.0;     // extension value/slope at tlo
    double yhi = 0.0, shi = 0.0;     // extension value/slope at thi
    std::vector<double> kinks;       // sorted breakpoints of eval

    double base(double t) const {
        if (extend && t < tlo) return ylo + slo * (t - tlo);
        if (extend && t > thi) return yhi + shi * (t - thi);
        return F(t);
    }

    double eval(double t) const {
        auto it = std::lower_bound(centers.begin(), centers.end(), t);
        for (int pass = 0; pass < 2; ++pass) {
            const auto c = (pass == 0) ? it : (it == centers.begin() ? centers.end() : it - 1);
            if (c != centers.end() && std::abs(t - *c) <= delta) {
                const double ym = base(*c - delta);
                const double yp = base(*c + delta);
                return ym + (yp - ym) / (2.0 * delta) * (t - *c + delta);
            }
        }
        return base(t);
    }
};

double mollified(const std::shared_ptr<const FlattenCore>& core, double t, int order) {
    const double eps = core->delta * core->delta;
    const auto& rule = gauss64();

    std::vector<double> cuts;
    cuts.push_back(t - eps);
    for (double k : core->kinks)
        if (k > t - eps && k < t + eps) cuts.push_back(k);
    cuts.push_back(t + eps);
    std::sort(cuts.begin(), cuts.end());

    const double scale = (order == 0) ? eps : (order == 1) ? eps * eps : eps * eps * eps;
    double total = 0.0;
    for (std::size_t seg = 0; seg + 1 < cuts.size(); ++seg) {
        const double a = cuts[seg], b = cuts[seg + 1];
        if (b - a < 1e-300) continue;
        const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
        double acc = 0.0;
        for (std::size_t i = 0; i < rule.node.size(); ++i) {
            const double s = mid + half * rule.node[i];
            const double u = (t - s) / eps;
            const double k = (order == 0) ? kern0(u) : (order == 1) ? kern1(u) : kern2(u);
            acc += rule.weight[i] * core->eval(s) * k;
        }
        total += acc * half;
    }
    return total / scale;
}

} // namespace

Profile::Profile()
    : f0_([](double) { return 0.0; }),
      f1_([](double) { return 0.0; }),
      f2_([](double) { return 0.0; }),
      lo_(-kInf),
      hi_(kInf) {}

Profile Profile::affine(double a, double b) {
    Profile p;
    p.f0_ = [a, b](double t) { return a + b * t; };
    p.f1_ = [b](double) { return b; };
    p.f2_ = [](double) { return 0.0; };
    p.affine_ = true;
    p.a_ = a;
    p.b_ = b;
    return p;
}

Profile Profile::bump(double center, double half_width, double amplitude) {
    if (!(half_width > 0.0)) throw Error("bump profile requires positive half width");
    Profile p;
    const double c = center, w = half_width, A = amplitude;
    p.f0_ = [c, w, A](double t) {
        const double s = (t - c) / w;
        if (std::abs(s) >= 1.0) return 0.0;
        const double m = 1.0 - s * s;
        return A * m * m * m;
    };
    p.f1_ = [c, w, A](double t) {
        const double s = (t - c) / w;
        if (std::abs(s) >= 1.0) return 0.0;
        const double m = 1.0 - s * s;
        return -6.0 * A * s * m * m / w;
    };
    p.f2_ = [c, w, A](double t) {
        const double s = (t - c) / w;
        if (std::abs(s) >= 1.0) return 0.0;
        const double m = 1.0 - s * s;
        return 6.0 * A * m * (5.0 * s * s - 1.0) / (w * w);
    };
    p.lo_ = c - w;
    p.hi_ = c + w;
    return p;
}

Profile Profile::custom(std::function<double(double)> f, std::function<double(double)> df,
                        std::function<double(double)> ddf, double support_lo,
                        double support_hi) {
    Profile p;
    p.f0_ = std::move(f);
    p.f1_ = std::move(df);
    p.f2_ = std::move(ddf);
    p.lo_ = support_lo;
    p.hi_ = support_hi;
    return p;
}

Profile Profile::scaled(double factor) const {
    if (affine_) return affine(a_ * factor, b_ * factor);
    Profile p = *this;
    const Profile base = *this;
    p.f0_ = [base, factor](double t) { return factor * base(t); };
    p.f1_ = [base, factor](double t) { return factor * base.d1(t); };
    p.f2_ = [base, factor](double t) { return factor * base.d2(t); };
    return p;
}

Profile Profile::rescaled(double center, double half_width) const {
    if (!(half_width > 0.0)) throw Error("rescaled profile requires positive half width");
    if (affine_) return affine(a_ - b_ * center / half_width, b_ / half_width);
    Profile p;
    const Profile base = *this;
    const double c = center, w = half_width;
    p.f0_ = [base, c, w](double t) { return base((t - c) / w); };
    p.f1_ = [base, c, w](double t) { return base.d1((t - c) / w) / w; };
    p.f2_ = [base, c, w](double t) { return base.d2((t - c) / w) / (w * w); };
    if (std::isfinite(lo_)) p.lo_ = c + lo_ * w;
    if (std::isfinite(hi_)) p.hi_ = c + hi_ * w;
    p.moll_ = moll_ * w;
    return p;
}

Profile flatten_profile(const Profile& F, std::vector<double> critical_values, double delta) {
    if (!(delta > 0.0)) throw Error("flattening requires a positive window width");
    if (delta > 0.25) throw Error("flattening window too wide for the quadratic smoothing scale");
    if (critical_values.empty()) throw Error("flattening requires at least one critical value");
    std::sort(critical_values.begin(), critical_values.end());
    for (std::size_t i = 0; i + 1 < critical_values.size(); ++i)
        if (critical_values[i + 1] - critical_values[i] < 2.0 * delta)
            throw OverlappingWindows("flattening windows around " +
                                     std::to_string(critical_values[i]) + " and " +
                                     std::to_string(critical_values[i + 1]) + " overlap");
    if (F.is_affine()) return F;

    auto core = std::make_shared<FlattenCore>();
    core->F = F;
    core->centers = critical_values;
    core->delta = delta;
    core->tlo = critical_values.front();
    core->thi = critical_values.back();
    core->extend = core->thi > core->tlo;
    if (core->extend) {
        core->ylo = F(core->tlo);
        core->slo = F.d1(core->tlo);
        core->yhi = F(core->thi);
        core->shi = F.d1(core->thi);
    }
    for (double c : core->centers) {
        core->kinks.push_back(c - delta);
        core->kinks.push_back(c + delta);
    }
    if (core->extend) {
        core->kinks.push_back(core->tlo);
        core->kinks.push_back(core->thi);
    }
    std::sort(core->kinks.begin(), core->kinks.end());

    Profile out;
    out.f0_ = [core](double t) { return mollified(core, t, 0); };
    out.f1_ = [core](double t) { return mollified(core, t, 1); };
    out.f2_ = [core](double t) { return mollified(core, t, 2); };
    const auto sup = F.support();
    out.lo_ = std::isfinite(sup.first) ? sup.first - delta * delta : -kInf;
    out.hi_ = std::isfinite(sup.second) ? sup.second + delta * delta : kInf;
    out.moll_ = delta * delta;
    return out;
}

} // namespace ef
