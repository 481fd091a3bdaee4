#ifndef INCOMPAT_JOINT_MEASURABILITY_HPP
#define INCOMPAT_JOINT_MEASURABILITY_HPP

#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "incompat/bloch.hpp"
#include "incompat/errors.hpp"
#include "incompat/ft_geometry.hpp"
#include "incompat/observable.hpp"

namespace incompat {

/// Sign matrix gamma_{jk} = (-1)^(j*floor(k/2) + k*floor(j/2)) for j = 1..3,
/// k = 0..3. Its rows are mutually orthogonal with squared norm 4, and its
/// columns map the Bloch vectors of a triplet onto the four anchors
/// {mu n1 + nu n2 + mu nu n3 : mu, nu = +-1}.
inline int gamma(int j, int k) {
    if (j < 1 || j > 3 || k < 0 || k > 3) throw IndexOutOfRange("gamma indices: j in 1..3, k in 0..3");
    const int exponent = j * (k / 2) + k * (j / 2);
    return (exponent % 2 == 0) ? 1 : -1;
}

namespace detail {
// gamma as a lookup table, kGamma[j-1][k].
inline constexpr int kGamma[3][4] = {
    {1, 1, -1, -1},
    {1, -1, 1, -1},
    {1, -1, -1, 1},
};
}  // namespace detail

/// Anchors q_k = sum_j gamma_{jk} n_j built from the Bloch parts of a triplet.
inline AnchorSet anchors(const Triplet& t) {
    AnchorSet q;
    for (int k = 0; k < 4; ++k) {
        BlochVector sum;
        for (int j = 0; j < 3; ++j) sum += detail::kGamma[j][k] * t[j].bloch;
        q[static_cast<std::size_t>(k)] = sum;
    }
    return q;
}

/// Copy of a triplet with every bias set to zero.
inline Triplet unbias(const Triplet& t) {
    Triplet u = t;
    for (auto& o : u.obs) o.bias = 0.0;
    return u;
}

/// Joint measurability verdict. The margin is 4 minus the anchor distance sum
/// to the Fermat-Torricelli point; nonnegative margin means compatible.
/// Verdicts with |margin| <= tol land on the compatibility boundary and are
/// reported jointly measurable with the boundary flag set.
struct JMVerdict {
    double margin = 0.0;
    bool jointly_measurable = false;
    bool boundary = false;
    FTSolution ft;
};

/// Closed-form compatibility test for an unbiased triplet:
/// jointly measurable iff sum_k |q_k - q_f| <= 4.
inline JMVerdict jm_margin(const Triplet& t, double tol = kTol) {
    if (!t.unbiased(0.0)) {
        throw BiasedInput("jm_margin requires an unbiased triplet; unbias first or use jm_feasible_general");
    }
    JMVerdict v;
    v.ft = ft_point(anchors(t));
    v.margin = 4.0 - v.ft.total_distance;
    v.jointly_measurable = v.margin >= -tol;
    v.boundary = std::abs(v.margin) <= tol;
    return v;
}

/// An eight-outcome parent measurement in (c, v) operator form. Element i
/// carries the sign pattern mu_j = +1 when bit (j-1) of i is clear, -1 when
/// set, for j = 1, 2, 3.
struct ParentPOVM {
    std::array<ScaledOperator, 8> elements;

    static constexpr int sign(int element, int j) {
        return ((element >> (j - 1)) & 1) ? -1 : 1;
    }
};

/// Completeness defect: max of |sum_i c_i - 1| and |sum_i v_i|.
inline double completeness_defect(const ParentPOVM& p) {
    double c = 0.0;
    BlochVector v;
    for (const auto& e : p.elements) {
        c += e.c;
        v += e.v;
    }
    return std::max(std::abs(c - 1.0), v.norm());
}

inline double min_positivity_margin(const ParentPOVM& p) {
    double m = positivity_margin(p.elements[0]);
    for (int i = 1; i < 8; ++i) m = std::min(m, positivity_margin(p.elements[static_cast<std::size_t>(i)]));
    return m;
}

/// Canonical eight-outcome parent for an unbiased triplet and a prescribed
/// Fermat-Torricelli point:
///   M(mu) = ( I + sum_j mu_j n_j . sigma - mu_1 mu_2 mu_3 ft . sigma ) / 8.
/// Throws NotPositive when some element fails positivity; the triplet/ft pair
/// then admits no parent of this canonical form and jm_feasible_general is
/// the fallback.
inline ParentPOVM parent_povm_8(const Triplet& t, const BlochVector& ft, double tol = kTol) {
    if (!t.unbiased(0.0)) throw BiasedInput("parent_povm_8 requires an unbiased triplet");
    ParentPOVM p;
    for (int i = 0; i < 8; ++i) {
        BlochVector v;
        int mu0 = 1;
        for (int j = 1; j <= 3; ++j) {
            const int mu = ParentPOVM::sign(i, j);
            v += mu * t[j - 1].bloch;
            mu0 *= mu;
        }
        v -= mu0 * ft;
        p.elements[static_cast<std::size_t>(i)] = ScaledOperator(0.125, v / 8.0);
    }
    for (int i = 0; i < 8; ++i) {
        if (positivity_margin(p.elements[static_cast<std::size_t>(i)]) < -tol) {
            throw NotPositive("canonical 8-outcome parent has a non-positive element", i);
        }
    }
    return p;
}

/// Marginal observable j of a parent POVM: N_{+|j} = sum over elements with
/// mu_j = +1.
inline Observable marginal(const ParentPOVM& p, int j) {
    if (j < 1 || j > 3) throw IndexOutOfRange("marginal index must be 1..3");
    double c = 0.0;
    BlochVector v;
    for (int i = 0; i < 8; ++i) {
        if (ParentPOVM::sign(i, j) == 1) {
            c += p.elements[static_cast<std::size_t>(i)].c;
            v += p.elements[static_cast<std::size_t>(i)].v;
        }
    }
    return Observable{2.0 * c - 1.0, 2.0 * v};
}

inline Triplet marginals(const ParentPOVM& p) {
    return Triplet{{marginal(p, 1), marginal(p, 2), marginal(p, 3)}};
}

/// Free parameters of the general parent-measurement expansion
///   8 M(mu) = I + sum_j mu_j (x_j + n_j . sigma)
///           + sum_{j>k} mu_j mu_k (z_jk + zv_jk . sigma)
///           - mu_1 mu_2 mu_3 (z + zv . sigma),
/// sixteen real degrees of freedom in total. Completeness of the eight
/// elements holds identically for every parameter choice; only positivity
/// constrains them.
struct ParentParams {
    double z = 0.0;
    std::array<double, 3> z_jk{};        // order z_21, z_31, z_32
    std::array<BlochVector, 3> zv_jk{};  // same order
    BlochVector zv;
};

/// Parent POVM assembled from the general expansion; elements are not
/// guaranteed positive.
inline ParentPOVM parent_from_params(const Triplet& t, const ParentParams& par) {
    ParentPOVM p;
    for (int i = 0; i < 8; ++i) {
        const int m1 = ParentPOVM::sign(i, 1);
        const int m2 = ParentPOVM::sign(i, 2);
        const int m3 = ParentPOVM::sign(i, 3);
        const int m0 = m1 * m2 * m3;
        const double c = 1.0 + m1 * t[0].bias + m2 * t[1].bias + m3 * t[2].bias +
                         m2 * m1 * par.z_jk[0] + m3 * m1 * par.z_jk[1] + m3 * m2 * par.z_jk[2] -
                         m0 * par.z;
        BlochVector v = m1 * t[0].bloch + m2 * t[1].bloch + m3 * t[2].bloch;
        v += m2 * m1 * par.zv_jk[0] + m3 * m1 * par.zv_jk[1] + m3 * m2 * par.zv_jk[2];
        v -= m0 * par.zv;
        p.elements[static_cast<std::size_t>(i)] = ScaledOperator(c / 8.0, v / 8.0);
    }
    return p;
}

namespace detail {

/// Objective of the feasibility search: the worst positivity violation
/// max_mu (|vector_mu| - scalar_mu) over the eight sign patterns, as a
/// function of the sixteen free parameters. Convex piecewise-smooth.
struct FeasibilityObjective {
    std::array<double, 3> xs;
    std::array<BlochVector, 3> ns;

    double eval(const std::array<double, 16>& th, std::array<double, 16>* grad = nullptr) const {
        double best = -1e300;
        for (int i = 0; i < 8; ++i) {
            const int m1 = ParentPOVM::sign(i, 1);
            const int m2 = ParentPOVM::sign(i, 2);
            const int m3 = ParentPOVM::sign(i, 3);
            const int m0 = m1 * m2 * m3;
            const double c12 = m1 * m2, c13 = m1 * m3, c23 = m2 * m3;
            const double s = 1.0 + m1 * xs[0] + m2 * xs[1] + m3 * xs[2] + c12 * th[0] +
                             c13 * th[1] + c23 * th[2] - m0 * th[3];
            BlochVector v = m1 * ns[0] + m2 * ns[1] + m3 * ns[2];
            v += BlochVector{th[4], th[5], th[6]} * c12;
            v += BlochVector{th[7], th[8], th[9]} * c13;
            v += BlochVector{th[10], th[11], th[12]} * c23;
            v -= BlochVector{th[13], th[14], th[15]} * static_cast<double>(m0);
            const double nv = v.norm();
            const double val = nv - s;
            if (val > best) {
                best = val;
                if (grad) {
                    const BlochVector u = nv > 1e-300 ? v / nv : BlochVector{};
                    (*grad)[0] = -c12;
                    (*grad)[1] = -c13;
                    (*grad)[2] = -c23;
                    (*grad)[3] = m0;
                    (*grad)[4] = c12 * u.x;
                    (*grad)[5] = c12 * u.y;
                    (*grad)[6] = c12 * u.z;
                    (*grad)[7] = c13 * u.x;
                    (*grad)[8] = c13 * u.y;
                    (*grad)[9] = c13 * u.z;
                    (*grad)[10] = c23 * u.x;
                    (*grad)[11] = c23 * u.y;
                    (*grad)[12] = c23 * u.z;
                    (*grad)[13] = -m0 * u.x;
                    (*grad)[14] = -m0 * u.y;
                    (*grad)[15] = -m0 * u.z;
                }
            }
        }
        return best;
    }
};

}  // namespace detail

/// Result of the general feasibility search: the best violation found and the
/// parameters attaining it.
struct FeasibilitySearch {
    double violation = 0.0;  // min over parameters of the worst positivity violation
    ParentParams params;
    double last_step = 0.0;
};

/// Decides whether a (possibly biased) triplet admits an eight-outcome parent
/// measurement by minimizing the worst positivity violation over the sixteen
/// free parameters of the general expansion. The objective is convex, so
/// subgradient descent with a geometrically decaying step converges; a few
/// deterministic restarts guard against slow starts.
inline FeasibilitySearch jm_feasible_search(const Triplet& t, int restarts = 4,
                                            std::size_t max_iters = 20000, std::uint64_t seed = 0) {
    detail::FeasibilityObjective obj;
    for (int j = 0; j < 3; ++j) {
        obj.xs[static_cast<std::size_t>(j)] = t[j].bias;
        obj.ns[static_cast<std::size_t>(j)] = t[j].bloch;
    }

    // Start candidates: all-zero parameters, the Fermat-Torricelli point in
    // the zv slot, and seeded random draws.
    std::vector<std::array<double, 16>> starts;
    starts.push_back({});
    {
        std::array<double, 16> th{};
        const BlochVector qf = ft_point(anchors(t)).point;
        th[13] = qf.x;
        th[14] = qf.y;
        th[15] = qf.z;
        starts.push_back(th);
    }
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 0.3);
    while (static_cast<int>(starts.size()) < restarts) {
        std::array<double, 16> th{};
        for (auto& c : th) c = gauss(rng);
        starts.push_back(th);
    }

    FeasibilitySearch best;
    best.violation = 1e300;
    for (const auto& start : starts) {
        std::array<double, 16> th = start;
        std::array<double, 16> grad{};
        double step = 0.5;
        const double decay = std::pow(1e-12 / step, 1.0 / static_cast<double>(max_iters));
        double local_best = obj.eval(th);
        std::array<double, 16> local_best_th = th;
        for (std::size_t it = 0; it < max_iters; ++it) {
            const double f = obj.eval(th, &grad);
            if (f < local_best) {
                local_best = f;
                local_best_th = th;
            }
            double gn = 0.0;
            for (double g : grad) gn += g * g;
            gn = std::sqrt(gn);
            if (gn < 1e-14) break;
            for (int i = 0; i < 16; ++i) th[static_cast<std::size_t>(i)] -= step / gn * grad[static_cast<std::size_t>(i)];
            step *= decay;
        }
        if (local_best < best.violation) {
            best.violation = local_best;
            best.last_step = step;
            best.params.z_jk = {local_best_th[0], local_best_th[1], local_best_th[2]};
            best.params.z = local_best_th[3];
            best.params.zv_jk = {BlochVector{local_best_th[4], local_best_th[5], local_best_th[6]},
                                 BlochVector{local_best_th[7], local_best_th[8], local_best_th[9]},
                                 BlochVector{local_best_th[10], local_best_th[11], local_best_th[12]}};
            best.params.zv = BlochVector{local_best_th[13], local_best_th[14], local_best_th[15]};
        }
    }
    if (best.last_step >= 1e-10) throw NonConvergence("feasibility search did not reach its stationarity step");
    return best;
}

/// Convex-feasibility compatibility oracle valid for biased triplets. The
/// reported margin is the negated minimal positivity violation; it shares the
/// sign, not the scale, of the closed-form margin.
inline JMVerdict jm_feasible_general(const Triplet& t, double tol = kTol, int restarts = 4,
                                     std::size_t max_iters = 20000, std::uint64_t seed = 0) {
    const FeasibilitySearch search = jm_feasible_search(t, restarts, max_iters, seed);
    JMVerdict v;
    v.ft = ft_point(anchors(t));
    v.margin = -search.violation;
    v.jointly_measurable = v.margin >= -tol;
    v.boundary = std::abs(v.margin) <= tol;
    return v;
}

}  // namespace incompat

#endif  // INCOMPAT_JOINT_MEASURABILITY_HPP
