#ifndef INCOMPAT_ANALYTIC_FAMILIES_HPP
#define INCOMPAT_ANALYTIC_FAMILIES_HPP

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>

#include "incompat/bloch.hpp"
#include "incompat/errors.hpp"
#include "incompat/mur.hpp"
#include "incompat/observable.hpp"

namespace incompat {

inline constexpr double kPi = 3.14159265358979323846;

/// Regime boundaries of the two symmetric families, in radians.
struct Thresholds {
    double theta0 = 0.0;
    double theta1 = 0.0;
    double gamma0 = 0.0;
    double gamma1 = 0.0;
};

namespace detail {

/// Bisection on a bracketing interval, to absolute x-tolerance.
inline double bisect(const std::function<double(double)>& f, double a, double b, double xtol = 1e-14) {
    double fa = f(a);
    double fb = f(b);
    if (fa == 0.0) return a;
    if (fb == 0.0) return b;
    if ((fa > 0.0) == (fb > 0.0)) throw RootNotBracketed("bisection interval does not bracket a root");
    while (b - a > xtol) {
        const double m = 0.5 * (a + b);
        const double fm = f(m);
        if (fm == 0.0) return m;
        if ((fm > 0.0) == (fa > 0.0)) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    return 0.5 * (a + b);
}

/// sin(theta) reached by the third-regime parametric curve at parameter t.
inline double perp_curve_sin_theta(double t) {
    const double tant = std::tan(t);
    const double c = std::cos(t);
    return tant * tant * (1.0 + 3.0 * c) * (1.0 + 3.0 * c) / 8.0 - 1.0;
}

inline double golden_section(const std::function<double(double)>& f, double a, double b,
                             double xtol = 1e-12) {
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double fc = f(c);
    double fd = f(d);
    while (b - a > xtol) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    return 0.5 * (a + b);
}

}  // namespace detail

/// Closed forms for theta0, gamma0, gamma1; theta1 by root-finding where the
/// second-regime optimum meets the parametric third-regime curve. Computed
/// once and cached.
inline const Thresholds& thresholds() {
    static const Thresholds cached = [] {
        Thresholds th;
        th.theta0 = std::acos(std::sqrt(2.0) - 1.0);
        th.gamma0 = std::atan(2.0 * std::sqrt(2.0));
        th.gamma1 = std::atan(std::sqrt(2.0) * (5.0 * std::sqrt(337.0) + 129.0) / 79.0);
        const auto boundary = [](double t) {
            const double c = std::cos(t);
            return detail::perp_curve_sin_theta(t) - std::sqrt(1.0 - c * c * c * c);
        };
        const double t1 = detail::bisect(boundary, 0.7, 1.2, 1e-15);
        th.theta1 = std::asin(std::clamp(detail::perp_curve_sin_theta(t1), -1.0, 1.0));
        return th;
    }();
    return cached;
}

enum class PerpRegime { M1, M2, M3 };
enum class YRegime { R1, R2, R3 };

inline const char* to_string(PerpRegime r) {
    switch (r) {
        case PerpRegime::M1: return "M1";
        case PerpRegime::M2: return "M2";
        default: return "M3";
    }
}
inline const char* to_string(YRegime r) {
    switch (r) {
        case YRegime::R1: return "R1";
        case YRegime::R2: return "R2";
        default: return "R3";
    }
}

/// Targets with one direction orthogonal to the other two:
/// m1 = (sin theta, 0, cos theta), m2 = x, m3 = y.
inline Triplet perp_triplet(double theta) {
    if (!(theta >= -1e-12 && theta <= kPi / 2 + 1e-12)) {
        throw OutOfRange("theta must lie in [0, pi/2]");
    }
    return unbiased_triplet({std::sin(theta), 0.0, std::cos(theta)}, kXAxis, kYAxis);
}

/// Incompatibility of the orthogonal family together with the optimal
/// symmetric parameters. The candidate class forced by the symmetry is
///   n3 = n3 * m3_hat,  n_{1,2} = (beta_+ m+_hat +- beta_- m-_hat)/2,
/// with m+-_hat the normalized bisectors of m1 and m2.
struct PerpSolution {
    double theta = 0.0;
    double value = 0.0;
    PerpRegime regime = PerpRegime::M1;
    double n3 = 0.0;
    double beta_plus = 0.0;
    double beta_minus = 0.0;
    double kappa = 0.0;
    double t_param = 0.0;
};

inline PerpSolution delta_perp(double theta) {
    if (!(theta >= -1e-12 && theta <= kPi / 2 + 1e-12)) {
        throw OutOfRange("theta must lie in [0, pi/2]");
    }
    theta = std::clamp(theta, 0.0, kPi / 2);
    const Thresholds& th = thresholds();
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    const double dp = std::sqrt(1.0 + c);
    const double dm = std::sqrt(1.0 - c);

    PerpSolution sol;
    sol.theta = theta;
    if (theta <= th.theta0) {
        sol.regime = PerpRegime::M1;
        sol.value = 2.0 * std::sqrt(2.0 + c) - 2.0;
        sol.n3 = 1.0 / std::sqrt(2.0 + c);  // 1 + dp^2 = 2 + cos(theta)
        sol.beta_plus = dp / std::sqrt(2.0 + c) + dm;
        sol.beta_minus = dp / std::sqrt(2.0 + c) - dm;
        sol.kappa = 0.0;
    } else if (theta <= th.theta1) {
        sol.regime = PerpRegime::M2;
        sol.value = 2.0 * std::sqrt(3.0 + c - 2.0 * std::sqrt(c) - 2.0 * s);
        sol.n3 = std::sqrt(c);
        sol.beta_plus = 2.0 * dm;
        sol.beta_minus = 0.0;
        sol.kappa = 0.0;
    } else {
        sol.regime = PerpRegime::M3;
        const auto match = [&](double t) { return detail::perp_curve_sin_theta(t) - s; };
        const double tmax = detail::bisect([](double t) { return detail::perp_curve_sin_theta(t) - 1.0; },
                                           0.9, 1.3, 1e-15);
        const double t1 = detail::bisect([](double t) {
            const double ct = std::cos(t);
            return detail::perp_curve_sin_theta(t) - std::sqrt(1.0 - ct * ct * ct * ct);
        }, 0.7, 1.2, 1e-15);
        const double t = detail::bisect(match, t1 - 1e-9, tmax + 1e-9, 1e-15);
        const double ct = std::cos(t);
        const double st = std::sin(t);
        sol.value = (1.0 - ct) / ct * std::sqrt(1.0 + 3.0 * ct * ct);
        sol.n3 = ct;
        sol.kappa = dm - st;
        sol.beta_plus = 2.0 * st;
        sol.beta_minus = 0.0;
        sol.t_param = t;
        return sol;
    }
    sol.t_param = std::acos(std::clamp(sol.n3, -1.0, 1.0));
    return sol;
}

/// Builds the optimal orthogonal-family triplet from its symmetric parameters.
inline Triplet perp_optimal_triplet(const PerpSolution& sol) {
    const Triplet m = perp_triplet(sol.theta);
    const BlochVector mp = (m[0].bloch + m[1].bloch).unit();
    const BlochVector mm = (m[0].bloch - m[1].bloch).unit();
    return unbiased_triplet(0.5 * (sol.beta_plus * mp + sol.beta_minus * mm),
                            0.5 * (sol.beta_plus * mp - sol.beta_minus * mm),
                            sol.n3 * m[2].bloch.unit());
}

/// Umbrella family: m_j = z cos(gamma) + e_j sin(gamma) with the e_j a planar
/// trine at 120 degrees, e_1 along x.
inline Triplet y_triplet(double gamma) {
    if (!(gamma >= -1e-12 && gamma <= kPi / 2 + 1e-12)) {
        throw OutOfRange("gamma must lie in [0, pi/2]");
    }
    const double c = std::cos(gamma);
    const double s = std::sin(gamma);
    const BlochVector e1{1.0, 0.0, 0.0};
    const BlochVector e2{-0.5, std::sqrt(3.0) / 2.0, 0.0};
    const BlochVector e3{-0.5, -std::sqrt(3.0) / 2.0, 0.0};
    return unbiased_triplet(c * kZAxis + s * e1, c * kZAxis + s * e2, c * kZAxis + s * e3);
}

/// Largest y such that the symmetric candidate n_j = x z + y e_j stays
/// jointly measurable: the compatibility region is bounded by a line for
/// |x| >= 1/9 and by an ellipse for |x| <= 1/9; the branches meet at
/// |x| = 1/9.
inline double y_jm_boundary(double x) {
    if (!(std::abs(x) <= 1.0 + 1e-12)) throw OutOfRange("|x| must not exceed 1");
    x = std::clamp(x, -1.0, 1.0);
    if (std::abs(x) >= 1.0 / 9.0) return (1.0 - std::abs(x)) / std::sqrt(2.0);
    return 2.0 / 3.0 * std::sqrt(1.0 - 9.0 * x * x);
}

/// Incompatibility of the umbrella family with the optimal symmetric
/// parameters (x, y) and the axis coordinate alpha of the Fermat-Torricelli
/// point of the optimal candidate's anchors.
struct YSolution {
    double gamma = 0.0;
    double value = 0.0;
    YRegime regime = YRegime::R1;
    double x = 0.0;
    double y = 0.0;
    double alpha = 0.0;
};

namespace detail {

/// Axis coordinate of the Fermat-Torricelli point for symmetric anchors
/// q_0 = 3x z, q_j = -x z + 2y e_j.
inline double y_family_alpha(double x, double y) {
    if (4.0 * std::sqrt(2.0) * std::abs(x) <= y) return 3.0 * x;
    if (4.0 * std::sqrt(2.0) * x >= y) return y / std::sqrt(2.0) - x;
    return -y / std::sqrt(2.0) - x;
}

}  // namespace detail

inline YSolution delta_y(double gamma) {
    if (!(gamma >= -1e-12 && gamma <= kPi / 2 + 1e-12)) {
        throw OutOfRange("gamma must lie in [0, pi/2]");
    }
    gamma = std::clamp(gamma, 0.0, kPi / 2);
    const Thresholds& th = thresholds();
    const double c = std::cos(gamma);
    const double s = std::sin(gamma);
    const double sqrt2 = std::sqrt(2.0);

    YSolution sol;
    sol.gamma = gamma;
    if (gamma <= th.gamma0) {
        sol.regime = YRegime::R1;
        sol.value = 2.0 * c + 2.0 * sqrt2 * s - 2.0;
        const Triplet targets = y_triplet(gamma);
        const MURReport r = mur_lower_bound(targets);
        const Triplet opt = (r.delta > kTol && r.optimal) ? *r.optimal : targets;
        sol.x = opt[0].bloch.z;
        sol.y = opt[0].bloch.x;  // e_1 is the x axis
    } else if (gamma <= th.gamma1) {
        sol.regime = YRegime::R2;
        sol.value = sqrt2 * s + 4.0 * c - 2.0 * std::sqrt(2.0 / 3.0 - (s - sqrt2 * c) * (s - sqrt2 * c));
        // The optimum sits on the elliptic part of the compatibility boundary
        // where the two competing distances balance: s - y = sqrt(2) (c - x).
        const auto g = [&](double x) {
            return (s - sqrt2 * (c - x)) - 2.0 / 3.0 * std::sqrt(std::max(0.0, 1.0 - 9.0 * x * x));
        };
        sol.x = detail::bisect(g, -1.0 / 9.0, 1.0 / 9.0 + 1e-15, 1e-15);
        sol.x = std::min(sol.x, 1.0 / 9.0);
        sol.y = 2.0 / 3.0 * std::sqrt(std::max(0.0, 1.0 - 9.0 * sol.x * sol.x));
    } else {
        sol.regime = YRegime::R3;
        const auto f = [&](double phi) {
            const double x = std::cos(phi) / 3.0;
            const double yt = std::sin(phi) / 3.0;
            return 2.0 * std::sqrt((c - x) * (c - x) + 4.0 * (s - 2.0 * yt) * (s - 2.0 * yt));
        };
        // Coarse scan then golden-section refinement over the half-circle.
        double best_phi = 0.0;
        double best_val = f(0.0);
        const int scan = 256;
        for (int i = 1; i <= scan; ++i) {
            const double phi = kPi * static_cast<double>(i) / static_cast<double>(scan);
            const double v = f(phi);
            if (v < best_val) {
                best_val = v;
                best_phi = phi;
            }
        }
        const double lo = std::max(0.0, best_phi - 2.0 * kPi / scan);
        const double hi = std::min(kPi, best_phi + 2.0 * kPi / scan);
        const double phi = detail::golden_section(f, lo, hi, 1e-13);
        sol.value = f(phi);
        sol.x = std::cos(phi) / 3.0;
        sol.y = 2.0 * std::sin(phi) / 3.0;
    }
    sol.alpha = detail::y_family_alpha(sol.x, sol.y);
    return sol;
}

/// Builds the optimal umbrella-family triplet n_j = x z + y e_j.
inline Triplet y_optimal_triplet(const YSolution& sol) {
    const BlochVector e1{1.0, 0.0, 0.0};
    const BlochVector e2{-0.5, std::sqrt(3.0) / 2.0, 0.0};
    const BlochVector e3{-0.5, -std::sqrt(3.0) / 2.0, 0.0};
    return unbiased_triplet(sol.x * kZAxis + sol.y * e1, sol.x * kZAxis + sol.y * e2,
                            sol.x * kZAxis + sol.y * e3);
}

}  // namespace incompat

#endif  // INCOMPAT_ANALYTIC_FAMILIES_HPP
