#ifndef INCOMPAT_FT_GEOMETRY_HPP
#define INCOMPAT_FT_GEOMETRY_HPP

#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <vector>

#include "incompat/bloch.hpp"
#include "incompat/errors.hpp"

namespace incompat {

/// The four anchor points whose Fermat-Torricelli point enters the joint
/// measurement criterion.
using AnchorSet = std::array<BlochVector, 4>;

/// Result of the Fermat-Torricelli minimization: the minimizing point, the
/// minimal distance sum, and the anchor index when the minimizer is one of
/// the anchors.
struct FTSolution {
    BlochVector point;
    double total_distance = 0.0;
    std::optional<int> at_anchor;
};

/// Sum of Euclidean distances from `point` to the four anchors.
inline double total_distance(const AnchorSet& anchors, const BlochVector& point) {
    double sum = 0.0;
    for (const auto& a : anchors) sum += distance(a, point);
    return sum;
}

/// Optimality test for the geometric median at anchor `index`: the anchor is
/// a minimizer iff the net unit pull of the remaining anchors has norm <= 1.
/// Anchors coinciding with the probed one contribute zero pull.
inline bool is_anchor_optimal(const AnchorSet& anchors, int index, double tol = kTol) {
    if (index < 0 || index > 3) throw IndexOutOfRange("anchor index must be 0..3");
    const BlochVector& a = anchors[static_cast<std::size_t>(index)];
    BlochVector pull;
    for (int j = 0; j < 4; ++j) {
        if (j == index) continue;
        const BlochVector d = anchors[static_cast<std::size_t>(j)] - a;
        const double dn = d.norm();
        if (dn > 1e-13) pull += d / dn;
    }
    return pull.norm() <= 1.0 + tol;
}

namespace detail {

struct WeightedAnchor {
    BlochVector point;
    double weight;
    int first_index;  // index of the first original anchor in the group
};

/// Coincident anchors merged into one weighted anchor.
inline std::vector<WeightedAnchor> group_anchors(const AnchorSet& anchors, double eps = 1e-12) {
    std::vector<WeightedAnchor> groups;
    for (int i = 0; i < 4; ++i) {
        const BlochVector& a = anchors[static_cast<std::size_t>(i)];
        bool merged = false;
        for (auto& g : groups) {
            if (distance(g.point, a) <= eps) {
                g.weight += 1.0;
                merged = true;
                break;
            }
        }
        if (!merged) groups.push_back({a, 1.0, i});
    }
    return groups;
}

inline double weighted_sum(const std::vector<WeightedAnchor>& groups, const BlochVector& x) {
    double sum = 0.0;
    for (const auto& g : groups) sum += g.weight * distance(g.point, x);
    return sum;
}

/// Net pull R_i = sum_{j != i} w_j (a_j - a_i)/|a_j - a_i| and the Lipschitz
/// sum L_i = sum_{j != i} w_j/|a_j - a_i| used for the step off an anchor.
inline void anchor_pull(const std::vector<WeightedAnchor>& groups, std::size_t i,
                        BlochVector& pull, double& lipschitz) {
    pull = BlochVector{};
    lipschitz = 0.0;
    for (std::size_t j = 0; j < groups.size(); ++j) {
        if (j == i) continue;
        const BlochVector d = groups[j].point - groups[i].point;
        const double dn = d.norm();
        pull += groups[j].weight / dn * d;
        lipschitz += groups[j].weight / dn;
    }
}

/// Newton refinement of the smooth interior optimum. Falls back silently when
/// the iterate approaches an anchor or the Hessian solve degrades.
inline BlochVector newton_polish(const std::vector<WeightedAnchor>& groups, BlochVector x) {
    for (int it = 0; it < 12; ++it) {
        BlochVector grad;
        double h[3][3] = {{0, 0, 0}, {0, 0, 0}, {0, 0, 0}};
        for (const auto& g : groups) {
            const BlochVector d = x - g.point;
            const double dn = d.norm();
            if (dn < 1e-9) return x;
            grad += g.weight / dn * d;
            const double c1 = g.weight / dn;
            const double c3 = g.weight / (dn * dn * dn);
            const double dd[3] = {d.x, d.y, d.z};
            for (int r = 0; r < 3; ++r) {
                for (int c = 0; c < 3; ++c) {
                    h[r][c] += (r == c ? c1 : 0.0) - c3 * dd[r] * dd[c];
                }
            }
        }
        if (grad.norm() < 1e-15) return x;
        // Solve h * step = grad by Gaussian elimination with partial pivoting.
        double m[3][4] = {{h[0][0], h[0][1], h[0][2], grad.x},
                          {h[1][0], h[1][1], h[1][2], grad.y},
                          {h[2][0], h[2][1], h[2][2], grad.z}};
        for (int col = 0; col < 3; ++col) {
            int piv = col;
            for (int r = col + 1; r < 3; ++r) {
                if (std::abs(m[r][col]) > std::abs(m[piv][col])) piv = r;
            }
            if (std::abs(m[piv][col]) < 1e-14) return x;
            for (int c = 0; c < 4; ++c) std::swap(m[piv][c], m[col][c]);
            for (int r = 0; r < 3; ++r) {
                if (r == col) continue;
                const double f = m[r][col] / m[col][col];
                for (int c = col; c < 4; ++c) m[r][c] -= f * m[col][c];
            }
        }
        const BlochVector step{m[0][3] / m[0][0], m[1][3] / m[1][1], m[2][3] / m[2][2]};
        const double f0 = weighted_sum(groups, x);
        BlochVector trial = x - step;
        double scale = 1.0;
        int halvings = 0;
        while (weighted_sum(groups, trial) > f0 && halvings < 30) {
            scale *= 0.5;
            trial = x - step * scale;
            ++halvings;
        }
        if (weighted_sum(groups, trial) > f0) return x;
        const double moved = (trial - x).norm();
        x = trial;
        if (moved < 1e-15) return x;
    }
    return x;
}

}  // namespace detail

/// Fermat-Torricelli point of four anchors: checks the anchors themselves
/// first, then runs Weiszfeld iteration from the centroid with the standard
/// step-off fix when an iterate lands on a non-optimal anchor, and finishes
/// with a Newton polish of interior optima.
inline FTSolution ft_point(const AnchorSet& anchors, std::size_t max_iters = 100000,
                           double step_tol = 1e-12) {
    for (const auto& a : anchors) {
        if (!a.finite()) throw OutOfRange("anchors must be finite");
    }
    const auto groups = detail::group_anchors(anchors);

    // Anchor optimality with multiplicity: |R_i| <= w_i.
    for (std::size_t i = 0; i < groups.size(); ++i) {
        BlochVector pull;
        double lipschitz = 0.0;
        detail::anchor_pull(groups, i, pull, lipschitz);
        if (pull.norm() <= groups[i].weight + kTol) {
            return FTSolution{groups[i].point, total_distance(anchors, groups[i].point),
                              groups[i].first_index};
        }
    }

    BlochVector x;
    for (const auto& g : groups) x += g.weight / 4.0 * g.point;

    for (std::size_t iter = 0; iter < max_iters; ++iter) {
        // Detect an iterate sitting on an anchor and step off along the net pull.
        bool at_anchor = false;
        for (std::size_t i = 0; i < groups.size(); ++i) {
            if (distance(x, groups[i].point) < 1e-13) {
                BlochVector pull;
                double lipschitz = 0.0;
                detail::anchor_pull(groups, i, pull, lipschitz);
                const double pn = pull.norm();
                if (pn <= groups[i].weight + kTol) {
                    return FTSolution{groups[i].point, total_distance(anchors, groups[i].point),
                                      groups[i].first_index};
                }
                x = groups[i].point + (pn - groups[i].weight) / lipschitz / pn * pull;
                at_anchor = true;
                break;
            }
        }
        if (at_anchor) continue;

        BlochVector num;
        double den = 0.0;
        for (const auto& g : groups) {
            const double d = distance(g.point, x);
            num += g.weight / d * g.point;
            den += g.weight / d;
        }
        const BlochVector next = num / den;
        const double step = distance(next, x);
        x = next;
        if (step < step_tol) break;
        if (iter + 1 == max_iters) {
            // Budget exhausted: accept only if no coarse perturbation improves.
            const double fx = total_distance(anchors, x);
            for (int dx = -1; dx <= 1; ++dx) {
                for (int dy = -1; dy <= 1; ++dy) {
                    for (int dz = -1; dz <= 1; ++dz) {
                        const BlochVector probe = x + BlochVector(dx, dy, dz) * 1e-4;
                        if (total_distance(anchors, probe) < fx - kTol) {
                            throw NonConvergence("Fermat-Torricelli iteration budget exhausted");
                        }
                    }
                }
            }
            break;
        }
    }

    x = detail::newton_polish(groups, x);
    return FTSolution{x, total_distance(anchors, x), std::nullopt};
}

}  // namespace incompat

#endif  // INCOMPAT_FT_GEOMETRY_HPP
