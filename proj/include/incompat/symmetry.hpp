#ifndef INCOMPAT_SYMMETRY_HPP
#define INCOMPAT_SYMMETRY_HPP

#include <array>
#include <cmath>
#include <vector>

#include "incompat/bloch.hpp"
#include "incompat/errors.hpp"
#include "incompat/ft_geometry.hpp"
#include "incompat/joint_measurability.hpp"
#include "incompat/observable.hpp"

namespace incompat {

/// A graded symmetry of a triplet: a mirror reflection g = I - 2 n n^T that
/// permutes the three directions up to sign flips, g m_j = omega_j m_sigma(j).
/// The permutation is an involution and omega is constant on its orbits.
struct GradedSymmetry {
    BlochVector mirror_normal;
    std::array<int, 3> perm{0, 1, 2};  // sigma as 0-based images
    std::array<int, 3> signs{1, 1, 1};

    int omega0() const { return signs[0] * signs[1] * signs[2]; }
};

/// Householder reflection of v across the plane with unit normal n.
inline BlochVector reflect(const BlochVector& mirror_normal, const BlochVector& v) {
    if (std::abs(mirror_normal.norm() - 1.0) > kTol) {
        throw InvalidNormal("mirror normal must be a unit vector");
    }
    return v - 2.0 * mirror_normal.dot(v) * mirror_normal;
}

namespace detail {

inline void push_candidate_normal(std::vector<BlochVector>& out, const BlochVector& v) {
    const double n = v.norm();
    if (n < 1e-12) return;
    BlochVector u = v / n;
    // Canonical sign: first component of significant magnitude positive.
    if (u.x < -1e-12 || (std::abs(u.x) <= 1e-12 && (u.y < -1e-12 || (std::abs(u.y) <= 1e-12 && u.z < 0.0)))) {
        u = -u;
    }
    for (const auto& w : out) {
        if (distance(w, u) < 1e-9) return;
    }
    out.push_back(u);
}

}  // namespace detail

/// Enumerates the graded symmetries of an unbiased triplet among a finite,
/// triplet-derived family of mirror normals: the directions themselves, their
/// pairwise bisectors and cross products, and the coordinate axes. Only
/// involutive permutations with orbit-constant signs qualify.
inline std::vector<GradedSymmetry> find_graded_symmetries(const Triplet& t, double tol = 1e-8) {
    if (!t.unbiased(0.0)) throw BiasedInput("graded symmetries are defined for unbiased triplets");
    std::array<BlochVector, 3> m;
    for (int j = 0; j < 3; ++j) {
        m[static_cast<std::size_t>(j)] = t[j].bloch;
        if (m[static_cast<std::size_t>(j)].norm() < 1e-12) {
            throw OutOfRange("graded symmetry detection needs nonzero Bloch vectors");
        }
    }
    std::array<BlochVector, 3> mh;
    for (int j = 0; j < 3; ++j) mh[static_cast<std::size_t>(j)] = m[static_cast<std::size_t>(j)].unit();

    std::vector<BlochVector> normals;
    for (int i = 0; i < 3; ++i) detail::push_candidate_normal(normals, mh[static_cast<std::size_t>(i)]);
    for (int i = 0; i < 3; ++i) {
        for (int j = i + 1; j < 3; ++j) {
            detail::push_candidate_normal(normals, mh[static_cast<std::size_t>(i)] + mh[static_cast<std::size_t>(j)]);
            detail::push_candidate_normal(normals, mh[static_cast<std::size_t>(i)] - mh[static_cast<std::size_t>(j)]);
            detail::push_candidate_normal(normals, mh[static_cast<std::size_t>(i)].cross(mh[static_cast<std::size_t>(j)]));
        }
    }
    detail::push_candidate_normal(normals, kXAxis);
    detail::push_candidate_normal(normals, kYAxis);
    detail::push_candidate_normal(normals, kZAxis);

    // Involutive permutations of {0,1,2}: identity and the three transpositions.
    static constexpr std::array<std::array<int, 3>, 4> kInvolutions{{
        {0, 1, 2}, {1, 0, 2}, {2, 1, 0}, {0, 2, 1},
    }};

    std::vector<GradedSymmetry> found;
    for (const auto& normal : normals) {
        std::array<BlochVector, 3> gm;
        for (int j = 0; j < 3; ++j) gm[static_cast<std::size_t>(j)] = reflect(normal, m[static_cast<std::size_t>(j)]);
        for (const auto& perm : kInvolutions) {
            for (int sign_bits = 0; sign_bits < 8; ++sign_bits) {
                std::array<int, 3> signs{};
                for (int j = 0; j < 3; ++j) signs[static_cast<std::size_t>(j)] = (sign_bits >> j) & 1 ? -1 : 1;
                bool orbit_consistent = true;
                for (int j = 0; j < 3; ++j) {
                    if (signs[static_cast<std::size_t>(j)] != signs[static_cast<std::size_t>(perm[static_cast<std::size_t>(j)])]) {
                        orbit_consistent = false;
                    }
                }
                if (!orbit_consistent) continue;
                bool matches = true;
                for (int j = 0; j < 3 && matches; ++j) {
                    const BlochVector want = signs[static_cast<std::size_t>(j)] *
                                             m[static_cast<std::size_t>(perm[static_cast<std::size_t>(j)])];
                    if (distance(gm[static_cast<std::size_t>(j)], want) > tol) matches = false;
                }
                if (!matches) continue;
                bool duplicate = false;
                for (const auto& s : found) {
                    if (s.perm == perm && s.signs == signs &&
                        (distance(s.mirror_normal, normal) < 1e-9 || distance(s.mirror_normal, -normal) < 1e-9)) {
                        duplicate = true;
                        break;
                    }
                }
                if (!duplicate) found.push_back(GradedSymmetry{normal, perm, signs});
            }
        }
    }
    return found;
}

/// Symmetry average of a candidate triplet, n'_j = (n_j + omega_j g n_sigma(j))/2.
/// The output is invariant under the symmetry; averaging preserves joint
/// measurability and never increases the worst-case uncertainty against
/// targets admitting the same symmetry.
inline Triplet symmetrize(const Triplet& candidate, const GradedSymmetry& sym) {
    if (!candidate.unbiased(0.0)) throw BiasedInput("symmetrize requires an unbiased candidate");
    Triplet out;
    for (int j = 0; j < 3; ++j) {
        const int sj = sym.perm[static_cast<std::size_t>(j)];
        const BlochVector mapped = sym.signs[static_cast<std::size_t>(j)] *
                                   reflect(sym.mirror_normal, candidate[sj].bloch);
        out[j] = Observable{0.0, 0.5 * (candidate[j].bloch + mapped)};
    }
    return out;
}

/// Whether a triplet is invariant under a graded symmetry within tol.
inline bool is_symmetric(const Triplet& t, const GradedSymmetry& sym, double tol = 1e-8) {
    for (int j = 0; j < 3; ++j) {
        const BlochVector want = sym.signs[static_cast<std::size_t>(j)] *
                                 t[sym.perm[static_cast<std::size_t>(j)]].bloch;
        if (distance(reflect(sym.mirror_normal, t[j].bloch), want) > tol) return false;
    }
    return true;
}

/// Checks that the Fermat-Torricelli point of a symmetry-invariant triplet
/// inherits the symmetry: g q_f = omega_1 omega_2 omega_3 q_f.
inline bool ft_symmetry_check(const Triplet& t, const GradedSymmetry& sym, double tol = 1e-7) {
    if (!t.unbiased(0.0)) throw BiasedInput("ft_symmetry_check requires an unbiased triplet");
    if (!is_symmetric(t, sym)) throw NotSymmetric("triplet is not invariant under the given symmetry");
    const BlochVector qf = ft_point(anchors(t)).point;
    return distance(reflect(sym.mirror_normal, qf), static_cast<double>(sym.omega0()) * qf) <= tol;
}

}  // namespace incompat

#endif  // INCOMPAT_SYMMETRY_HPP
