#ifndef INCOMPAT_MUR_HPP
#define INCOMPAT_MUR_HPP

#include <array>
#include <cmath>
#include <optional>

#include "incompat/bloch.hpp"
#include "incompat/errors.hpp"
#include "incompat/ft_geometry.hpp"
#include "incompat/joint_measurability.hpp"
#include "incompat/observable.hpp"

namespace incompat {

/// Lower-bound report for the uncertainty of jointly approximating an
/// unbiased triplet: delta = (1/4) sum_k |p_k - p_f| - 1, the bound being
/// attainable iff delta <= min_k |p_k - p_f|. The pull directions
/// e_k = (p_f - p_k)/|p_f - p_k| sum to zero at the Fermat-Torricelli point
/// and are populated only when every anchor distance exceeds tol.
struct MURReport {
    double delta = 0.0;
    AnchorSet p_anchors;
    FTSolution p_ft;
    double min_anchor_dist = 0.0;
    bool saturable = false;
    std::optional<Triplet> optimal;
    std::optional<std::array<BlochVector, 4>> directions;
};

/// Worst-case total statistic distance between an unbiased target triplet and
/// an arbitrary approximating triplet, maximized over states in closed form:
/// 2 max_k ( |p_k - q_k| + |sum_j gamma_jk x_j| ).
inline double worst_case_uncertainty(const Triplet& targets, const Triplet& approx) {
    if (!targets.unbiased(0.0)) throw BiasedInput("worst_case_uncertainty requires unbiased targets");
    const AnchorSet p = anchors(targets);
    const AnchorSet q = anchors(approx);
    double best = 0.0;
    for (int k = 0; k < 4; ++k) {
        double bias_term = 0.0;
        for (int j = 0; j < 3; ++j) bias_term += detail::kGamma[j][k] * approx[j].bias;
        const double v = distance(p[static_cast<std::size_t>(k)], q[static_cast<std::size_t>(k)]) + std::abs(bias_term);
        best = std::max(best, v);
    }
    return 2.0 * best;
}

/// A state attaining worst_case_uncertainty: the unit vector along
/// p_k* - q_k* for the lowest maximizing anchor index k*, sign-aligned with
/// the bias term. Returns the z axis by convention when the maximizer leaves
/// the direction free.
inline BlochVector worst_case_state(const Triplet& targets, const Triplet& approx, double tol = kTol) {
    if (!targets.unbiased(0.0)) throw BiasedInput("worst_case_state requires unbiased targets");
    const AnchorSet p = anchors(targets);
    const AnchorSet q = anchors(approx);
    int kstar = 0;
    double best = -1.0;
    std::array<double, 4> bias_terms{};
    for (int k = 0; k < 4; ++k) {
        double bias_term = 0.0;
        for (int j = 0; j < 3; ++j) bias_term += detail::kGamma[j][k] * approx[j].bias;
        bias_terms[static_cast<std::size_t>(k)] = bias_term;
        const double v = distance(p[static_cast<std::size_t>(k)], q[static_cast<std::size_t>(k)]) + std::abs(bias_term);
        if (v > best + tol) {  // ties broken by lowest index
            best = v;
            kstar = k;
        }
    }
    const BlochVector diff = p[static_cast<std::size_t>(kstar)] - q[static_cast<std::size_t>(kstar)];
    if (diff.norm() <= tol) return kZAxis;
    const double sign = bias_terms[static_cast<std::size_t>(kstar)] > 0.0 ? -1.0 : 1.0;
    return sign * diff.unit();
}

/// Evaluates the uncertainty lower bound 2*delta for an unbiased target
/// triplet together with its attainability condition.
inline MURReport mur_lower_bound(const Triplet& targets, double tol = kTol) {
    if (!targets.unbiased(0.0)) throw BiasedInput("mur_lower_bound requires an unbiased triplet");
    MURReport r;
    r.p_anchors = anchors(targets);
    r.p_ft = ft_point(r.p_anchors);
    r.delta = r.p_ft.total_distance / 4.0 - 1.0;
    r.min_anchor_dist = 1e300;
    bool nondegenerate = true;
    for (int k = 0; k < 4; ++k) {
        const double d = distance(r.p_anchors[static_cast<std::size_t>(k)], r.p_ft.point);
        r.min_anchor_dist = std::min(r.min_anchor_dist, d);
        if (d <= tol) nondegenerate = false;
    }
    r.saturable = r.delta <= r.min_anchor_dist + tol;
    if (nondegenerate) {
        std::array<BlochVector, 4> e;
        for (int k = 0; k < 4; ++k) {
            e[static_cast<std::size_t>(k)] = (r.p_ft.point - r.p_anchors[static_cast<std::size_t>(k)]).unit();
        }
        r.directions = e;
    }
    if (r.delta <= tol) {
        r.optimal = targets;  // compatible targets approximate themselves
    } else if (r.saturable && r.directions) {
        Triplet opt;
        for (int j = 0; j < 3; ++j) {
            BlochVector correction;
            for (int k = 0; k < 4; ++k) {
                correction += detail::kGamma[j][k] * (*r.directions)[static_cast<std::size_t>(k)];
            }
            opt[j] = Observable{0.0, targets[j].bloch + r.delta / 4.0 * correction};
        }
        r.optimal = opt;
    }
    return r;
}

/// Optimal jointly measurable triplet attaining the bound:
/// n_j = m_j + (delta/4) sum_k gamma_jk e_k. Requires attainability and a
/// genuinely incompatible target (delta > tol).
inline Triplet optimal_triplet(const Triplet& targets, double tol = kTol) {
    const MURReport r = mur_lower_bound(targets, tol);
    if (r.delta <= tol) throw AlreadyCompatible("targets are jointly measurable; they are their own best approximation");
    if (!r.saturable) throw NotSaturable("the lower bound is not attainable for these targets");
    if (!r.directions) throw DegenerateAnchor("an anchor coincides with the Fermat-Torricelli point");
    return *r.optimal;
}

/// Four-outcome randomized implementation of a boundary jointly measurable
/// triplet: sample direction g_k with probability P_k, measure sharply along
/// it, and deterministically relabel the outcome for each observable as
/// mu_j = gamma_jk * mu_k. Zero-probability entries carry the z axis and are
/// never sampled.
struct RandomizedImplementation {
    std::array<double, 4> probabilities{};
    std::array<BlochVector, 4> directions{};

    /// Post-processing distribution p_j(mu | k, mu_k) = (1 + mu gamma_jk mu_k)/2,
    /// a 0/1 table.
    static double postprocess(int j, int k, int mu, int mu_k) {
        return (1.0 + mu * gamma(j, k) * mu_k) / 2.0;
    }
};

/// Implemented marginals of a randomized implementation (no parent needed):
/// n_j = sum_k gamma_jk P_k g_k, always unbiased.
inline Triplet implemented_marginals(const RandomizedImplementation& impl) {
    Triplet t;
    for (int j = 0; j < 3; ++j) {
        BlochVector n;
        for (int k = 0; k < 4; ++k) {
            n += detail::kGamma[j][k] * impl.probabilities[static_cast<std::size_t>(k)] *
                 impl.directions[static_cast<std::size_t>(k)];
        }
        t[j] = Observable{0.0, n};
    }
    return t;
}

/// Eight-outcome parent assembled from a randomized implementation,
///   M(omega) = sum_{k, mu_k} P_k [prod_j p_j(omega_j | k, mu_k)] O(mu_k | k),
/// a positive combination of sharp effects: positive by construction, complete
/// whenever the probabilities sum to one, and reproducing the implemented
/// marginals exactly.
inline ParentPOVM reconstruct_parent(const RandomizedImplementation& impl) {
    ParentPOVM p;
    for (int i = 0; i < 8; ++i) p.elements[static_cast<std::size_t>(i)] = ScaledOperator(0.0, BlochVector{});
    for (int k = 0; k < 4; ++k) {
        const double pk = impl.probabilities[static_cast<std::size_t>(k)];
        if (pk == 0.0) continue;
        const BlochVector& g = impl.directions[static_cast<std::size_t>(k)];
        for (int mu_k = -1; mu_k <= 1; mu_k += 2) {
            const ScaledOperator effect(0.5, 0.5 * mu_k * g);
            for (int i = 0; i < 8; ++i) {
                double w = pk;
                for (int j = 1; j <= 3; ++j) {
                    w *= RandomizedImplementation::postprocess(j, k, ParentPOVM::sign(i, j), mu_k);
                }
                if (w > 0.0) {
                    p.elements[static_cast<std::size_t>(i)] = p.elements[static_cast<std::size_t>(i)] + effect * w;
                }
            }
        }
    }
    return p;
}

/// Randomized implementation of an unbiased triplet sitting on the joint
/// measurement boundary: P_k = |q_k - q_f|/4 and g_k = (q_k - q_f)/|q_k - q_f|.
inline RandomizedImplementation randomized_implementation(const Triplet& t, double boundary_tol = 1e-6) {
    const JMVerdict v = jm_margin(t);
    if (std::abs(v.margin) > boundary_tol) {
        throw NotOnBoundary("randomized implementation requires a triplet saturating the joint measurement condition");
    }
    RandomizedImplementation impl;
    const AnchorSet q = anchors(t);
    for (int k = 0; k < 4; ++k) {
        const BlochVector d = q[static_cast<std::size_t>(k)] - v.ft.point;
        const double dn = d.norm();
        impl.probabilities[static_cast<std::size_t>(k)] = dn / 4.0;
        impl.directions[static_cast<std::size_t>(k)] = dn > kTol ? d / dn : kZAxis;
    }
    return impl;
}

/// Randomized implementation of the optimal approximation of saturable
/// targets, built directly from the target geometry:
/// P_k = (|p_k - p_f| - delta)/4 with directions along p_k - p_f.
inline RandomizedImplementation implement_optimal(const Triplet& targets, double tol = kTol) {
    const MURReport r = mur_lower_bound(targets, tol);
    if (r.delta <= tol) throw AlreadyCompatible("targets are jointly measurable; nothing to approximate");
    if (!r.saturable) throw NotSaturable("the lower bound is not attainable for these targets");
    RandomizedImplementation impl;
    for (int k = 0; k < 4; ++k) {
        const BlochVector d = r.p_anchors[static_cast<std::size_t>(k)] - r.p_ft.point;
        const double dn = d.norm();
        const double pk = (dn - r.delta) / 4.0;
        impl.probabilities[static_cast<std::size_t>(k)] = std::max(0.0, pk);
        impl.directions[static_cast<std::size_t>(k)] = pk > tol ? d / dn : kZAxis;
    }
    return impl;
}

}  // namespace incompat

#endif  // INCOMPAT_MUR_HPP
