#ifndef INCOMPAT_OBSERVABLE_HPP
#define INCOMPAT_OBSERVABLE_HPP

#include <array>
#include <cmath>
#include <sstream>

#include "incompat/bloch.hpp"
#include "incompat/errors.hpp"

namespace incompat {

/// A two-outcome qubit observable N_pm = (I pm (bias + bloch.sigma))/2.
/// Valid iff |bias| + |bloch| <= 1; unbiased iff bias == 0.
struct Observable {
    double bias = 0.0;
    BlochVector bloch;

    constexpr bool operator==(const Observable&) const = default;
    bool unbiased(double tol = kTol) const { return std::abs(bias) <= tol; }
};

/// An ordered triple of observables, either the targets to approximate or a
/// jointly measured approximation.
struct Triplet {
    std::array<Observable, 3> obs;

    Observable& operator[](int j) { return obs[static_cast<std::size_t>(j)]; }
    const Observable& operator[](int j) const { return obs[static_cast<std::size_t>(j)]; }
    constexpr bool operator==(const Triplet&) const = default;

    bool unbiased(double tol = kTol) const {
        return obs[0].unbiased(tol) && obs[1].unbiased(tol) && obs[2].unbiased(tol);
    }
};

/// Convenience constructor for a triplet of unbiased observables.
inline Triplet unbiased_triplet(const BlochVector& n1, const BlochVector& n2, const BlochVector& n3) {
    return Triplet{{Observable{0.0, n1}, Observable{0.0, n2}, Observable{0.0, n3}}};
}

/// The operator c*I + v.sigma in real (c, v) form. Positive semidefinite iff
/// c >= |v|; trace is 2c. Complex matrices are never materialized.
struct ScaledOperator {
    double c = 0.0;
    BlochVector v;

    constexpr ScaledOperator() = default;
    constexpr ScaledOperator(double c_, const BlochVector& v_) : c(c_), v(v_) {}

    constexpr ScaledOperator operator+(const ScaledOperator& o) const { return {c + o.c, v + o.v}; }
    constexpr ScaledOperator operator*(double s) const { return {c * s, v * s}; }
};

/// c - |v|; the operator is positive semidefinite iff this is >= -tol.
inline double positivity_margin(const ScaledOperator& op) { return op.c - op.v.norm(); }

/// Builds an observable from bias and Bloch vector, rejecting parameters that
/// do not describe a POVM. Inputs are never clipped.
inline Observable make_observable(double bias, const BlochVector& bloch, double tol = kTol) {
    if (!std::isfinite(bias) || !bloch.finite()) {
        throw InvalidObservable("observable parameters must be finite");
    }
    const double budget = std::abs(bias) + bloch.norm();
    if (budget > 1.0 + tol) {
        std::ostringstream msg;
        msg << "|bias| + |bloch| = " << budget << " exceeds 1";
        throw InvalidObservable(msg.str());
    }
    return Observable{bias, bloch};
}

namespace detail {
inline void require_state(const BlochVector& state, double tol = kTol) {
    if (!state.finite() || state.norm() > 1.0 + tol) {
        throw InvalidState("state Bloch vector must satisfy |r| <= 1");
    }
}
}  // namespace detail

/// Born-rule probability of `outcome` (+1 or -1) when measuring `obs` on the
/// state with Bloch vector `state`.
inline double outcome_probability(const Observable& obs, const BlochVector& state, int outcome) {
    detail::require_state(state);
    if (outcome != 1 && outcome != -1) throw IndexOutOfRange("outcome must be +1 or -1");
    return (1.0 + outcome * (obs.bias + obs.bloch.dot(state))) / 2.0;
}

/// Statistic distance between two observables on a fixed state: twice the
/// total variation distance of their outcome distributions, which for
/// two-outcome qubit observables is 2|(a.bias - b.bias) + r.(a.bloch - b.bloch)|.
inline double statistical_distance(const Observable& a, const Observable& b, const BlochVector& state) {
    detail::require_state(state);
    return 2.0 * std::abs((a.bias - b.bias) + state.dot(a.bloch - b.bloch));
}

}  // namespace incompat

#endif  // INCOMPAT_OBSERVABLE_HPP
