#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "incompat/analytic_families.hpp"
#include "incompat/mur.hpp"

using namespace incompat;

namespace {
constexpr double kDeg = kPi / 180.0;
}

TEST_CASE("thresholds match their closed forms") {
    const Thresholds& th = thresholds();
    CHECK_THAT(th.theta0, Catch::Matchers::WithinAbs(std::acos(std::sqrt(2.0) - 1.0), 1e-15));
    CHECK_THAT(th.theta0 / kDeg, Catch::Matchers::WithinAbs(65.53, 0.01));
    CHECK_THAT(th.theta1 / kDeg, Catch::Matchers::WithinAbs(71.53, 0.01));
    CHECK_THAT(th.gamma0, Catch::Matchers::WithinAbs(std::atan(2.0 * std::sqrt(2.0)), 1e-15));
    CHECK_THAT(th.gamma0 / kDeg, Catch::Matchers::WithinAbs(70.5288, 1e-3));
    CHECK_THAT(th.gamma1 / kDeg, Catch::Matchers::WithinAbs(75.80, 0.01));
}

TEST_CASE("perp_triplet frames") {
    const Triplet t0 = perp_triplet(0.0);
    CHECK(distance(t0[0].bloch, kZAxis) < 1e-15);
    CHECK(t0[1].bloch == kXAxis);
    CHECK(t0[2].bloch == kYAxis);

    const Triplet t90 = perp_triplet(kPi / 2.0);
    CHECK(distance(t90[0].bloch, kXAxis) < 1e-15);

    const Triplet t45 = perp_triplet(kPi / 4.0);
    CHECK(distance(t45[0].bloch, {std::sqrt(2.0) / 2.0, 0.0, std::sqrt(2.0) / 2.0}) < 1e-15);

    CHECK_THROWS_AS(perp_triplet(-0.1), OutOfRange);
    CHECK_THROWS_AS(perp_triplet(2.0), OutOfRange);
}

TEST_CASE("delta_perp branch values") {
    const PerpSolution at0 = delta_perp(0.0);
    CHECK(at0.regime == PerpRegime::M1);
    CHECK_THAT(at0.value, Catch::Matchers::WithinAbs(2.0 * std::sqrt(3.0) - 2.0, 1e-12));

    const PerpSolution at60 = delta_perp(60.0 * kDeg);
    CHECK(at60.regime == PerpRegime::M1);
    CHECK_THAT(at60.value, Catch::Matchers::WithinAbs(2.0 * std::sqrt(2.5) - 2.0, 1e-12));

    const double th70 = 70.0 * kDeg;
    const PerpSolution at70 = delta_perp(th70);
    CHECK(at70.regime == PerpRegime::M2);
    CHECK_THAT(at70.value,
               Catch::Matchers::WithinAbs(2.0 * std::sqrt(3.0 + std::cos(th70) -
                                                          2.0 * std::sqrt(std::cos(th70)) -
                                                          2.0 * std::sin(th70)),
                                          1e-12));

    const PerpSolution at80 = delta_perp(80.0 * kDeg);
    CHECK(at80.regime == PerpRegime::M3);
    CHECK(at80.kappa >= 0.0);
}

TEST_CASE("delta_perp is continuous across regime boundaries") {
    const Thresholds& th = thresholds();
    for (double boundary : {th.theta0, th.theta1}) {
        const double below = delta_perp(boundary - 1e-9).value;
        const double above = delta_perp(boundary + 1e-9).value;
        CHECK_THAT(below, Catch::Matchers::WithinAbs(above, 1e-6));
    }
    // fine-grained continuity sweep
    double prev = delta_perp(0.0).value;
    for (double deg = 0.1; deg <= 90.0 + 1e-9; deg += 0.1) {
        const double v = delta_perp(deg * kDeg).value;
        REQUIRE(std::abs(v - prev) < 2e-3);
        prev = v;
    }
}

TEST_CASE("first perp branch equals the theoretical bound where attainable") {
    const Thresholds& th = thresholds();
    for (double frac : {0.0, 0.25, 0.5, 0.75, 0.999}) {
        const double theta = frac * th.theta0;
        const PerpSolution sol = delta_perp(theta);
        const MURReport r = mur_lower_bound(perp_triplet(theta));
        REQUIRE_THAT(sol.value, Catch::Matchers::WithinAbs(2.0 * r.delta, 1e-9));
        REQUIRE(r.saturable);
    }
    // attainability fails beyond the first threshold
    for (double deg : {67.0, 70.0, 75.0, 85.0}) {
        REQUIRE_FALSE(mur_lower_bound(perp_triplet(deg * kDeg)).saturable);
    }
}

TEST_CASE("perp optimal parameters respect the compatibility boundary") {
    for (double deg = 1.0; deg <= 89.0; deg += 4.0) {
        const PerpSolution sol = delta_perp(deg * kDeg);
        REQUIRE(std::abs(sol.beta_plus) + std::abs(sol.beta_minus) <=
                2.0 * std::sqrt(1.0 - sol.n3 * sol.n3) + 1e-9);
        // the symmetric candidate built from them is compatible and achieves
        // the branch value
        const Triplet n = perp_optimal_triplet(sol);
        REQUIRE(jm_margin(n).margin >= -1e-9);
        REQUIRE_THAT(worst_case_uncertainty(perp_triplet(deg * kDeg), n),
                     Catch::Matchers::WithinAbs(sol.value, 1e-9));
    }
}

TEST_CASE("y_triplet frames") {
    const Triplet t0 = y_triplet(0.0);
    for (int j = 0; j < 3; ++j) CHECK(distance(t0[j].bloch, kZAxis) < 1e-15);

    const Triplet trine = y_triplet(kPi / 2.0);
    for (int j = 0; j < 3; ++j) CHECK(std::abs(trine[j].bloch.z) < 1e-15);

    for (double gamma : {0.3, 0.9, 1.4}) {
        const Triplet t = y_triplet(gamma);
        const double c = std::cos(gamma), s = std::sin(gamma);
        for (int j = 0; j < 3; ++j) {
            for (int k = j + 1; k < 3; ++k) {
                REQUIRE_THAT(t[j].bloch.dot(t[k].bloch),
                             Catch::Matchers::WithinAbs(c * c - s * s / 2.0, 1e-14));
            }
        }
    }
    CHECK_THROWS_AS(y_triplet(-0.2), OutOfRange);
}

TEST_CASE("y_jm_boundary branches") {
    CHECK_THAT(y_jm_boundary(0.0), Catch::Matchers::WithinAbs(2.0 / 3.0, 1e-15));
    // the two branches meet at |x| = 1/9
    const double left = 2.0 / 3.0 * std::sqrt(1.0 - 1.0 / 9.0);
    const double right = (1.0 - 1.0 / 9.0) / std::sqrt(2.0);
    CHECK_THAT(left, Catch::Matchers::WithinAbs(right, 1e-15));
    CHECK_THAT(y_jm_boundary(1.0 / 9.0), Catch::Matchers::WithinAbs(left, 1e-15));
    CHECK(y_jm_boundary(1.0) == 0.0);
    CHECK_THROWS_AS(y_jm_boundary(1.5), OutOfRange);

    // points on the boundary are compatible, points just above are not
    for (double x : {0.0, 0.05, 0.2, 0.6}) {
        const double y = y_jm_boundary(x);
        const BlochVector e1{1, 0, 0}, e2{-0.5, std::sqrt(3.0) / 2.0, 0}, e3{-0.5, -std::sqrt(3.0) / 2.0, 0};
        const Triplet on = unbiased_triplet(x * kZAxis + y * e1, x * kZAxis + y * e2, x * kZAxis + y * e3);
        REQUIRE(jm_margin(on).margin >= -1e-9);
        const double yy = y + 1e-3;
        const Triplet above =
            unbiased_triplet(x * kZAxis + yy * e1, x * kZAxis + yy * e2, x * kZAxis + yy * e3);
        REQUIRE(jm_margin(above).margin < 0.0);
    }
}

TEST_CASE("delta_y branch values and regimes") {
    CHECK_THAT(delta_y(0.0).value, Catch::Matchers::WithinAbs(0.0, 1e-12));

    const Thresholds& th = thresholds();
    const YSolution r1 = delta_y(0.9 * th.gamma0);
    CHECK(r1.regime == YRegime::R1);
    const double g = 0.9 * th.gamma0;
    CHECK_THAT(r1.value, Catch::Matchers::WithinAbs(
                             2.0 * std::cos(g) + 2.0 * std::sqrt(2.0) * std::sin(g) - 2.0, 1e-12));

    CHECK(delta_y(73.0 * kDeg).regime == YRegime::R2);
    CHECK(delta_y(80.0 * kDeg).regime == YRegime::R3);

    // at 90 degrees the third-branch minimum is analytic: x = 0, y = 2/3
    const YSolution r3 = delta_y(kPi / 2.0);
    CHECK_THAT(r3.value, Catch::Matchers::WithinAbs(4.0 / 3.0, 1e-9));
    CHECK_THAT(r3.x, Catch::Matchers::WithinAbs(0.0, 1e-9));
    CHECK_THAT(r3.y, Catch::Matchers::WithinAbs(2.0 / 3.0, 1e-9));
}

TEST_CASE("delta_y is continuous across regime boundaries") {
    const Thresholds& th = thresholds();
    for (double boundary : {th.gamma0, th.gamma1}) {
        const double below = delta_y(boundary - 1e-9).value;
        const double above = delta_y(boundary + 1e-9).value;
        CHECK_THAT(below, Catch::Matchers::WithinAbs(above, 1e-6));
    }
    double prev = delta_y(0.0).value;
    for (double deg = 0.1; deg <= 90.0 + 1e-9; deg += 0.1) {
        const double v = delta_y(deg * kDeg).value;
        REQUIRE(std::abs(v - prev) < 2e-3);
        prev = v;
    }
}

TEST_CASE("first umbrella branch equals the theoretical bound where attainable") {
    const Thresholds& th = thresholds();
    for (double frac : {0.1, 0.4, 0.7, 0.95}) {
        const double gamma = frac * th.gamma0;
        const YSolution sol = delta_y(gamma);
        const MURReport r = mur_lower_bound(y_triplet(gamma));
        REQUIRE_THAT(sol.value, Catch::Matchers::WithinAbs(2.0 * r.delta, 1e-9));
        REQUIRE(r.saturable);
    }
    for (double deg : {73.0, 80.0, 88.0}) {
        REQUIRE_FALSE(mur_lower_bound(y_triplet(deg * kDeg)).saturable);
    }
}

TEST_CASE("umbrella optimal parameters sit on the compatibility boundary beyond R1") {
    for (double deg : {71.0, 73.0, 75.5, 76.0, 80.0, 86.0, 90.0}) {
        const YSolution sol = delta_y(deg * kDeg);
        REQUIRE_THAT(sol.y, Catch::Matchers::WithinAbs(y_jm_boundary(sol.x), 1e-9));
        const Triplet n = y_optimal_triplet(sol);
        REQUIRE(jm_margin(n).margin >= -1e-9);
        REQUIRE_THAT(worst_case_uncertainty(y_triplet(deg * kDeg), n),
                     Catch::Matchers::WithinAbs(sol.value, 1e-9));
        // the ft point of the symmetric candidate's anchors lies at alpha on
        // the symmetry axis
        const FTSolution ft = ft_point(anchors(n));
        REQUIRE_THAT(ft.point.z, Catch::Matchers::WithinAbs(sol.alpha, 1e-7));
        REQUIRE(std::abs(ft.point.x) < 1e-7);
        REQUIRE(std::abs(ft.point.y) < 1e-7);
    }
}
