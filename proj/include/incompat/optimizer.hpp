#ifndef INCOMPAT_OPTIMIZER_HPP
#define INCOMPAT_OPTIMIZER_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <vector>

#include "incompat/bloch.hpp"
#include "incompat/errors.hpp"
#include "incompat/joint_measurability.hpp"
#include "incompat/mur.hpp"
#include "incompat/observable.hpp"
#include "incompat/symmetry.hpp"

namespace incompat {

struct OptimizerOptions {
    int restarts = 32;
    std::uint64_t seed = 0;
    int max_iters = 2000;
    double step_tolerance = 1e-10;
    double penalty_weight = 100.0;
};

enum class Method { closed_form, symmetric_reduced, general };

inline const char* to_string(Method m) {
    switch (m) {
        case Method::closed_form: return "closed_form";
        case Method::symmetric_reduced: return "symmetric_reduced";
        default: return "general";
    }
}

/// Exact incompatibility of a target triplet: the minimal worst-case total
/// statistic distance over jointly measurable approximations, together with
/// the minimizer and the relation to the theoretical lower bound.
struct IncompatibilityResult {
    double delta_num = 0.0;
    Triplet optimal;
    double lower_bound = 0.0;  // 2*delta
    double gap = 0.0;
    bool saturated = false;
    Method method = Method::general;
    double restart_spread = 0.0;  // disagreement of the two best restarts
};

namespace detail {

using Flat9 = std::array<double, 9>;

inline Flat9 to_flat(const Triplet& t) {
    return {t[0].bloch.x, t[0].bloch.y, t[0].bloch.z, t[1].bloch.x, t[1].bloch.y,
            t[1].bloch.z, t[2].bloch.x, t[2].bloch.y, t[2].bloch.z};
}

inline Triplet from_flat(const Flat9& f) {
    return unbiased_triplet({f[0], f[1], f[2]}, {f[3], f[4], f[5]}, {f[6], f[7], f[8]});
}

/// One symmetrization pass applied to flat coordinates; a linear projection
/// for each symmetry, iterated until the composite stabilizes on the
/// invariant subspace.
inline Flat9 project_symmetric(Flat9 f, const std::vector<GradedSymmetry>& syms, int rounds = 40) {
    if (syms.empty()) return f;
    for (int r = 0; r < rounds; ++r) {
        for (const auto& s : syms) {
            const Triplet t = symmetrize(from_flat(f), s);
            f = to_flat(t);
        }
    }
    return f;
}

/// Orthonormal basis of the symmetry-invariant subspace of candidate space.
inline std::vector<Flat9> symmetric_basis(const std::vector<GradedSymmetry>& syms) {
    std::vector<Flat9> basis;
    for (int i = 0; i < 9; ++i) {
        Flat9 v{};
        v[static_cast<std::size_t>(i)] = 1.0;
        v = project_symmetric(v, syms);
        for (const auto& b : basis) {
            double dot = 0.0;
            for (int k = 0; k < 9; ++k) dot += v[static_cast<std::size_t>(k)] * b[static_cast<std::size_t>(k)];
            for (int k = 0; k < 9; ++k) v[static_cast<std::size_t>(k)] -= dot * b[static_cast<std::size_t>(k)];
        }
        double n2 = 0.0;
        for (double c : v) n2 += c * c;
        if (n2 > 1e-16) {
            const double inv = 1.0 / std::sqrt(n2);
            for (auto& c : v) c *= inv;
            basis.push_back(v);
        }
    }
    return basis;
}

inline Flat9 combine(const std::vector<Flat9>& basis, const std::vector<double>& coords) {
    Flat9 f{};
    for (std::size_t i = 0; i < basis.size(); ++i) {
        for (int k = 0; k < 9; ++k) f[static_cast<std::size_t>(k)] += coords[i] * basis[i][static_cast<std::size_t>(k)];
    }
    return f;
}

inline std::vector<double> coordinates(const std::vector<Flat9>& basis, const Flat9& f) {
    std::vector<double> c(basis.size(), 0.0);
    for (std::size_t i = 0; i < basis.size(); ++i) {
        for (int k = 0; k < 9; ++k) c[i] += basis[i][static_cast<std::size_t>(k)] * f[static_cast<std::size_t>(k)];
    }
    return c;
}

/// Largest scale lambda in [0,1] with jm_margin(lambda * t) >= 0; the margin
/// is monotone under inward scaling, so bisection applies. Returns 0 only for
/// pathological inputs (the zero triplet is always compatible).
inline double inward_feasible_scale(const Triplet& t) {
    if (jm_margin(t).margin >= 0.0) return 1.0;
    double lo = 0.0, hi = 1.0;
    for (int it = 0; it < 100; ++it) {
        const double mid = 0.5 * (lo + hi);
        Triplet scaled = t;
        for (auto& o : scaled.obs) o.bloch *= mid;
        (jm_margin(scaled).margin >= 0.0 ? lo : hi) = mid;
    }
    return lo;
}

inline Triplet scaled(const Triplet& t, double s) {
    Triplet out = t;
    for (auto& o : out.obs) o.bloch *= s;
    return out;
}

/// Deterministic Nelder-Mead on an n-dimensional objective. Runs several
/// rounds with shrinking initial simplex around the incumbent; suited to the
/// piecewise-smooth max-type objectives appearing here.
inline std::vector<double> nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                                       std::vector<double> x0, int max_iters, double step_tol) {
    const std::size_t n = x0.size();
    if (n == 0) return x0;
    double best_val = f(x0);
    for (double h : {0.3, 0.03, 0.003}) {
        std::vector<std::vector<double>> pts(n + 1, x0);
        std::vector<double> vals(n + 1);
        for (std::size_t i = 0; i < n; ++i) pts[i + 1][i] += h;
        for (std::size_t i = 0; i <= n; ++i) vals[i] = f(pts[i]);
        for (int iter = 0; iter < max_iters; ++iter) {
            std::vector<std::size_t> order(n + 1);
            for (std::size_t i = 0; i <= n; ++i) order[i] = i;
            std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
                return vals[a] < vals[b] || (vals[a] == vals[b] && a < b);
            });
            std::vector<std::vector<double>> spts(n + 1);
            std::vector<double> svals(n + 1);
            for (std::size_t i = 0; i <= n; ++i) {
                spts[i] = pts[order[i]];
                svals[i] = vals[order[i]];
            }
            pts = spts;
            vals = svals;

            double diameter = 0.0;
            for (std::size_t i = 1; i <= n; ++i) {
                double d2 = 0.0;
                for (std::size_t k = 0; k < n; ++k) d2 += (pts[i][k] - pts[0][k]) * (pts[i][k] - pts[0][k]);
                diameter = std::max(diameter, std::sqrt(d2));
            }
            if (diameter < step_tol) break;

            std::vector<double> centroid(n, 0.0);
            for (std::size_t i = 0; i < n; ++i) {
                for (std::size_t k = 0; k < n; ++k) centroid[k] += pts[i][k];
            }
            for (auto& c : centroid) c /= static_cast<double>(n);

            auto along = [&](double coef) {
                std::vector<double> p(n);
                for (std::size_t k = 0; k < n; ++k) p[k] = centroid[k] + coef * (centroid[k] - pts[n][k]);
                return p;
            };
            const std::vector<double> refl = along(1.0);
            const double frefl = f(refl);
            if (frefl < vals[0]) {
                const std::vector<double> expd = along(2.0);
                const double fexpd = f(expd);
                if (fexpd < frefl) {
                    pts[n] = expd;
                    vals[n] = fexpd;
                } else {
                    pts[n] = refl;
                    vals[n] = frefl;
                }
            } else if (frefl < vals[n - 1]) {
                pts[n] = refl;
                vals[n] = frefl;
            } else {
                const std::vector<double> contr = along(frefl < vals[n] ? 0.5 : -0.5);
                const double fcontr = f(contr);
                if (fcontr < std::min(frefl, vals[n])) {
                    pts[n] = contr;
                    vals[n] = fcontr;
                } else {
                    for (std::size_t i = 1; i <= n; ++i) {
                        for (std::size_t k = 0; k < n; ++k) pts[i][k] = pts[0][k] + 0.5 * (pts[i][k] - pts[0][k]);
                        vals[i] = f(pts[i]);
                    }
                }
            }
        }
        std::size_t ibest = 0;
        for (std::size_t i = 1; i <= n; ++i) {
            if (vals[i] < vals[ibest]) ibest = i;
        }
        if (vals[ibest] < best_val) {
            best_val = vals[ibest];
            x0 = pts[ibest];
        }
    }
    return x0;
}

}  // namespace detail

/// General numerical minimization of the worst-case uncertainty over jointly
/// measurable candidates, ignoring the closed-form fast path. Multi-start
/// Nelder-Mead over the symmetry-reduced candidate space, with a quadratic
/// penalty outside the compatible region and a final inward-scaling
/// projection onto its boundary.
inline IncompatibilityResult incompatibility_numeric(const Triplet& targets,
                                                     const OptimizerOptions& opts = {}) {
    if (!targets.unbiased(0.0)) throw BiasedInput("incompatibility requires unbiased targets");
    const MURReport bound = mur_lower_bound(targets);

    std::vector<GradedSymmetry> syms;
    try {
        syms = find_graded_symmetries(targets);
    } catch (const OutOfRange&) {
        // zero Bloch vectors: no symmetry reduction
    }
    const std::vector<detail::Flat9> basis = detail::symmetric_basis(syms);
    const bool reduced = basis.size() < 9;

    const auto objective = [&](const std::vector<double>& coords) {
        const Triplet n = detail::from_flat(detail::combine(basis, coords));
        const double margin = jm_margin(n).margin;
        const double violation = std::max(0.0, -margin);
        return worst_case_uncertainty(targets, n) + opts.penalty_weight * violation * violation;
    };

    std::mt19937_64 rng(opts.seed);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    const auto random_ball = [&]() {
        BlochVector v;
        do {
            v = BlochVector{unif(rng), unif(rng), unif(rng)};
        } while (v.norm2() > 1.0);
        return v;
    };

    struct RestartResult {
        double value;
        Triplet candidate;
        int index;
    };
    std::vector<RestartResult> results;

    const int restarts = std::max(1, opts.restarts);
    for (int r = 0; r < restarts; ++r) {
        Triplet start;
        if (r == 0) {
            start = detail::scaled(targets, detail::inward_feasible_scale(targets));
        } else {
            Triplet draw = unbiased_triplet(random_ball(), random_ball(), random_ball());
            draw = detail::from_flat(detail::project_symmetric(detail::to_flat(draw), syms));
            start = detail::scaled(draw, detail::inward_feasible_scale(draw));
        }
        std::vector<double> coords = detail::coordinates(basis, detail::to_flat(start));
        coords = detail::nelder_mead(objective, coords, opts.max_iters, opts.step_tolerance);

        Triplet candidate = detail::from_flat(detail::combine(basis, coords));
        const double scale = detail::inward_feasible_scale(candidate);
        candidate = detail::scaled(candidate, scale);
        results.push_back({worst_case_uncertainty(targets, candidate), candidate, r});
    }

    std::sort(results.begin(), results.end(), [](const RestartResult& a, const RestartResult& b) {
        return a.value < b.value || (a.value == b.value && a.index < b.index);
    });

    IncompatibilityResult out;
    out.delta_num = results[0].value;
    out.optimal = results[0].candidate;
    out.lower_bound = 2.0 * bound.delta;
    out.gap = out.delta_num - out.lower_bound;
    out.saturated = out.gap <= 1e-9;
    out.method = reduced ? Method::symmetric_reduced : Method::general;
    out.restart_spread = results.size() > 1 ? results[1].value - results[0].value : 0.0;
    if (results.size() > 1 && out.restart_spread > 1e-4) {
        throw NonConvergence("best restarts disagree beyond tolerance");
    }
    return out;
}

/// Exact incompatibility. Attainable instances take the closed form; the rest
/// fall through to the numerical minimization.
inline IncompatibilityResult incompatibility(const Triplet& targets, const OptimizerOptions& opts = {}) {
    if (!targets.unbiased(0.0)) throw BiasedInput("incompatibility requires unbiased targets");
    const MURReport bound = mur_lower_bound(targets);
    if (bound.delta <= kTol) {
        IncompatibilityResult out;
        out.delta_num = 0.0;
        out.optimal = targets;
        out.lower_bound = 2.0 * bound.delta;
        out.gap = -out.lower_bound;
        out.saturated = std::abs(out.gap) <= 1e-9;
        out.method = Method::closed_form;
        return out;
    }
    if (bound.saturable && bound.optimal) {
        IncompatibilityResult out;
        out.delta_num = 2.0 * bound.delta;
        out.optimal = *bound.optimal;
        out.lower_bound = out.delta_num;
        out.gap = 0.0;
        out.saturated = true;
        out.method = Method::closed_form;
        return out;
    }
    return incompatibility_numeric(targets, opts);
}

/// Exhaustive grid upper bound on the incompatibility over the
/// symmetry-reduced candidate space, refined around the incumbent; only
/// compatible grid points count. Converges to the true value from above as
/// the grid refines.
inline double brute_force_incompatibility(const Triplet& targets, int grid_steps) {
    if (!targets.unbiased(0.0)) throw BiasedInput("brute_force_incompatibility requires unbiased targets");
    if (grid_steps < 2) throw OutOfRange("grid_steps must be at least 2");

    std::vector<GradedSymmetry> syms;
    try {
        syms = find_graded_symmetries(targets);
    } catch (const OutOfRange&) {
    }
    const std::vector<detail::Flat9> basis = detail::symmetric_basis(syms);
    const std::size_t dim = basis.size();
    if (std::pow(static_cast<double>(grid_steps), static_cast<double>(dim)) > 1e8) {
        throw TooLarge("grid would exceed the evaluation budget; reduce steps or exploit symmetry");
    }

    // Per-coordinate range keeping every Bloch vector inside the unit ball.
    std::vector<double> radius(dim, 0.0);
    for (std::size_t i = 0; i < dim; ++i) {
        double worst_block = 0.0;
        for (int j = 0; j < 3; ++j) {
            const double bn = BlochVector{basis[i][static_cast<std::size_t>(3 * j)],
                                          basis[i][static_cast<std::size_t>(3 * j + 1)],
                                          basis[i][static_cast<std::size_t>(3 * j + 2)]}
                                  .norm();
            worst_block = std::max(worst_block, bn);
        }
        radius[i] = worst_block > 1e-12 ? 1.0 / worst_block : 1.0;
    }

    std::vector<double> center(dim, 0.0);
    std::vector<double> halfwidth = radius;
    double best = worst_case_uncertainty(targets, unbiased_triplet({}, {}, {}));  // zero triplet is compatible
    std::vector<double> best_coords = center;

    for (int level = 0; level < 3; ++level) {
        std::vector<int> idx(dim, 0);
        while (true) {
            std::vector<double> coords(dim);
            for (std::size_t i = 0; i < dim; ++i) {
                coords[i] = center[i] - halfwidth[i] +
                            2.0 * halfwidth[i] * static_cast<double>(idx[i]) / static_cast<double>(grid_steps - 1);
            }
            const Triplet n = detail::from_flat(detail::combine(basis, coords));
            if (jm_margin(n).margin >= 0.0) {
                const double v = worst_case_uncertainty(targets, n);
                if (v < best) {
                    best = v;
                    best_coords = coords;
                }
            }
            std::size_t d = 0;
            while (d < dim && ++idx[d] == grid_steps) {
                idx[d] = 0;
                ++d;
            }
            if (d == dim) break;
        }
        center = best_coords;
        for (std::size_t i = 0; i < dim; ++i) {
            halfwidth[i] = 2.5 * (2.0 * halfwidth[i] / static_cast<double>(grid_steps - 1));
        }
    }
    return best;
}

/// Bundled diagnostic for a proposed approximation of a target triplet.
struct CandidateReport {
    double jm_margin = 0.0;  // margin of the unbiased version of the candidate
    double worst_case = 0.0;
    double lower_bound = 0.0;  // 2*delta of the targets
    bool meets_bound = false;
};

inline CandidateReport verify_candidate(const Triplet& targets, const Triplet& candidate) {
    if (!targets.unbiased(0.0)) throw BiasedInput("verify_candidate requires unbiased targets");
    CandidateReport r;
    r.jm_margin = jm_margin(unbias(candidate)).margin;
    r.worst_case = worst_case_uncertainty(targets, candidate);
    r.lower_bound = 2.0 * mur_lower_bound(targets).delta;
    r.meets_bound = r.worst_case >= r.lower_bound - 1e-9;
    return r;
}

/// Diagnostic search over *biased* jointly measurable candidates. Restricting
/// to unbiased candidates is provably optimal; this probe exists to confirm
/// empirically that allowing biases never improves the minimum. Feasibility
/// of biased candidates comes from the general convex oracle, which makes
/// this path far slower than incompatibility_numeric.
inline double incompatibility_biased_probe(const Triplet& targets, int restarts = 3,
                                           int max_iters = 300, std::uint64_t seed = 0) {
    if (!targets.unbiased(0.0)) throw BiasedInput("incompatibility_biased_probe requires unbiased targets");

    const auto violation_of = [](const Triplet& n) {
        return std::max(0.0, jm_feasible_search(n, 2, 2500, 1).violation);
    };
    const auto from_coords = [](const std::vector<double>& c) {
        Triplet n = detail::from_flat({c[0], c[1], c[2], c[3], c[4], c[5], c[6], c[7], c[8]});
        for (int j = 0; j < 3; ++j) n[j].bias = c[static_cast<std::size_t>(9 + j)];
        return n;
    };
    const auto objective = [&](const std::vector<double>& c) {
        const Triplet n = from_coords(c);
        const double viol = violation_of(n);
        return worst_case_uncertainty(targets, n) + 100.0 * viol * viol;
    };
    const auto project_feasible = [&](Triplet n) {
        if (violation_of(n) <= 1e-7) return n;
        double lo = 0.0, hi = 1.0;
        for (int it = 0; it < 30; ++it) {
            const double mid = 0.5 * (lo + hi);
            Triplet s = n;
            for (auto& o : s.obs) {
                o.bias *= mid;
                o.bloch *= mid;
            }
            (violation_of(s) <= 1e-7 ? lo : hi) = mid;
        }
        for (auto& o : n.obs) {
            o.bias *= lo;
            o.bloch *= lo;
        }
        return n;
    };

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(-0.5, 0.5);
    double best = 1e300;
    for (int r = 0; r < std::max(1, restarts); ++r) {
        std::vector<double> c(12, 0.0);
        if (r == 0) {
            const Triplet start = detail::scaled(targets, detail::inward_feasible_scale(targets));
            const detail::Flat9 f = detail::to_flat(start);
            for (int i = 0; i < 9; ++i) c[static_cast<std::size_t>(i)] = f[static_cast<std::size_t>(i)];
        } else {
            for (int i = 0; i < 12; ++i) c[static_cast<std::size_t>(i)] = unif(rng);
            Triplet draw = from_coords(c);
            draw = project_feasible(draw);
            const detail::Flat9 f = detail::to_flat(draw);
            for (int i = 0; i < 9; ++i) c[static_cast<std::size_t>(i)] = f[static_cast<std::size_t>(i)];
            for (int j = 0; j < 3; ++j) c[static_cast<std::size_t>(9 + j)] = draw[j].bias;
        }
        c = detail::nelder_mead(objective, c, max_iters, 1e-8);
        const Triplet candidate = project_feasible(from_coords(c));
        best = std::min(best, worst_case_uncertainty(targets, candidate));
    }
    return best;
}

}  // namespace incompat

#endif  // INCOMPAT_OPTIMIZER_HPP
