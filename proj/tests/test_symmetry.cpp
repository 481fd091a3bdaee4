#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "incompat/analytic_families.hpp"
#include "incompat/mur.hpp"
#include "incompat/symmetry.hpp"

using namespace incompat;

namespace {

BlochVector random_ball(std::mt19937_64& rng, double radius = 1.0) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    BlochVector v;
    do {
        v = BlochVector{u(rng), u(rng), u(rng)};
    } while (v.norm2() > 1.0);
    return radius * v;
}

Triplet random_jm(std::mt19937_64& rng) {
    Triplet t = unbiased_triplet(random_ball(rng), random_ball(rng), random_ball(rng));
    while (jm_margin(t).margin < 0.0) {
        for (auto& o : t.obs) o.bloch *= 0.9;
    }
    return t;
}

bool has_symmetry(const std::vector<GradedSymmetry>& syms, const std::array<int, 3>& perm,
                  const std::array<int, 3>& signs) {
    for (const auto& s : syms) {
        if (s.perm == perm && s.signs == signs) return true;
    }
    return false;
}

}  // namespace

TEST_CASE("reflect is a Householder reflection") {
    CHECK(reflect(kZAxis, {1, 2, 3}) == BlochVector{1, 2, -3});
    CHECK(reflect(kXAxis, {0, 2, -1}) == BlochVector{0, 2, -1});  // perpendicular vectors fixed

    std::mt19937_64 rng(3);
    for (int i = 0; i < 50; ++i) {
        const BlochVector n = random_ball(rng).unit();
        const BlochVector v = random_ball(rng, 2.0);
        const BlochVector w = reflect(n, v);
        REQUIRE(distance(reflect(n, w), v) < 1e-14);            // involution
        REQUIRE(std::abs(w.norm() - v.norm()) < 1e-14);         // isometry
    }

    CHECK_THROWS_AS(reflect({0.5, 0, 0}, {1, 0, 0}), InvalidNormal);
}

TEST_CASE("graded symmetries of the orthogonal family") {
    const Triplet t = perp_triplet(kPi / 4.0);
    const auto syms = find_graded_symmetries(t);
    REQUIRE_FALSE(syms.empty());

    // mirror flipping m3 while fixing m1 and m2
    CHECK(has_symmetry(syms, {0, 1, 2}, {1, 1, -1}));
    // bisector mirrors swapping m1 and m2, with both sign patterns
    CHECK(has_symmetry(syms, {1, 0, 2}, {1, 1, 1}));
    CHECK(has_symmetry(syms, {1, 0, 2}, {-1, -1, 1}));

    for (const auto& s : syms) {
        // involution and orbit-constant signs, exactly
        for (int j = 0; j < 3; ++j) {
            CHECK(s.perm[static_cast<std::size_t>(s.perm[static_cast<std::size_t>(j)])] == j);
            CHECK(s.signs[static_cast<std::size_t>(j)] == s.signs[static_cast<std::size_t>(s.perm[static_cast<std::size_t>(j)])]);
        }
        CHECK(is_symmetric(t, s));
    }
}

TEST_CASE("graded symmetries of the umbrella family") {
    const Triplet t = y_triplet(1.2);
    const auto syms = find_graded_symmetries(t);

    // three mirrors fixing one leg and swapping the other two
    CHECK(has_symmetry(syms, {0, 2, 1}, {1, 1, 1}));
    CHECK(has_symmetry(syms, {2, 1, 0}, {1, 1, 1}));
    CHECK(has_symmetry(syms, {1, 0, 2}, {1, 1, 1}));
}

TEST_CASE("symmetrize averages onto the invariant subspace") {
    const Triplet targets = perp_triplet(0.6);
    const auto syms = find_graded_symmetries(targets);
    REQUIRE_FALSE(syms.empty());
    const GradedSymmetry sym = syms.front();

    // already-invariant input is a fixed point
    const Triplet fixed = symmetrize(targets, sym);
    for (int j = 0; j < 3; ++j) REQUIRE(distance(fixed[j].bloch, targets[j].bloch) < 1e-14);

    // zero input stays zero
    const Triplet zero = symmetrize(unbiased_triplet({}, {}, {}), sym);
    for (int j = 0; j < 3; ++j) CHECK(zero[j].bloch.norm() == 0.0);

    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 50; ++trial) {
        const Triplet c = random_jm(rng);
        const Triplet s1 = symmetrize(c, sym);
        const Triplet s2 = symmetrize(s1, sym);
        for (int j = 0; j < 3; ++j) {
            REQUIRE(distance(s1[j].bloch, s2[j].bloch) < 1e-14);  // idempotent
            // output is exactly invariant
            const BlochVector want = sym.signs[static_cast<std::size_t>(j)] *
                                     s1[sym.perm[static_cast<std::size_t>(j)]].bloch;
            REQUIRE(distance(reflect(sym.mirror_normal, s1[j].bloch), want) < 1e-14);
        }
    }

    Triplet biased = targets;
    biased[0].bias = 0.1;
    CHECK_THROWS_AS(symmetrize(biased, sym), BiasedInput);
}

TEST_CASE("symmetrize preserves compatibility and never increases the worst case") {
    std::mt19937_64 rng(23);
    for (double theta : {0.3, 0.9, 1.3}) {
        const Triplet targets = perp_triplet(theta);
        const auto syms = find_graded_symmetries(targets);
        REQUIRE_FALSE(syms.empty());
        for (int trial = 0; trial < 15; ++trial) {
            const Triplet c = random_jm(rng);
            for (const auto& sym : syms) {
                const Triplet avg = symmetrize(c, sym);
                REQUIRE(jm_margin(avg).margin >= -1e-9);
                REQUIRE(worst_case_uncertainty(targets, avg) <=
                        worst_case_uncertainty(targets, c) + 1e-9);
            }
        }
    }
}

TEST_CASE("the Fermat-Torricelli point inherits the symmetry") {
    // umbrella family: every T_j fixes the z axis and the ft point lies on it
    const Triplet ty = y_triplet(1.3);
    for (const auto& sym : find_graded_symmetries(ty)) {
        CHECK(ft_symmetry_check(ty, sym));
    }

    // compatible symmetric triplet with interior ft point
    const Triplet small = unbiased_triplet(0.3 * kXAxis, 0.3 * kYAxis, 0.3 * kZAxis);
    for (const auto& sym : find_graded_symmetries(small)) {
        CHECK(ft_symmetry_check(small, sym));
    }

    // mismatched symmetry is rejected
    const auto syms = find_graded_symmetries(unbiased_triplet(kXAxis, kYAxis, kZAxis));
    REQUIRE_FALSE(syms.empty());
    const Triplet other = unbiased_triplet({0.9, 0.1, 0.0}, {0.0, 0.8, 0.2}, {0.1, 0.0, 0.7});
    CHECK_THROWS_AS(ft_symmetry_check(other, syms.front()), NotSymmetric);
}

TEST_CASE("symmetric restriction does not lose the optimum") {
    // Minimizing over the symmetry-invariant class reproduces the
    // unrestricted optimizer on symmetric instances; delegated to the
    // analytic-vs-numeric agreement tests in test_optimizer.cpp, here we
    // check the averaged form of a near-optimal candidate keeps its value.
    const Triplet targets = y_triplet(1.35);
    const auto syms = find_graded_symmetries(targets);
    REQUIRE_FALSE(syms.empty());

    std::mt19937_64 rng(29);
    for (int trial = 0; trial < 10; ++trial) {
        Triplet c = random_jm(rng);
        double before = worst_case_uncertainty(targets, c);
        for (const auto& sym : syms) c = symmetrize(c, sym);
        REQUIRE(worst_case_uncertainty(targets, c) <= before + 1e-9);
    }
}
