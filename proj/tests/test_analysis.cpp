#include <cmath>
#include <stdexcept>
#include <vector>

#include "bct/analysis.hpp"
#include "doctest.h"

using namespace bct;
using namespace bct::analysis;
using geometry::Angle;
using geometry::kPi;

TEST_CASE("interval probabilities") {
    // reference values from a 30-digit evaluation of the same integral
    CHECK(std::fabs(p_equal_interval(Interval::one) - 0.1421949248142435) < 1e-14);
    CHECK(p_equal_interval(Interval::two) == p_equal_interval(Interval::one));
    CHECK(std::fabs(p_equal_interval(Interval::one) + p_equal_interval(Interval::two) - 0.284389849628487) < 1e-14);
    CHECK(std::fabs(p_equal_interval(Interval::one) - 0.142) < 5e-4);
    CHECK(p_equal_interval(Interval::one) == p_opposite_equal_closed(kPi / 10).p1);
}

TEST_CASE("nu curve closed form") {
    const auto mid = p_opposite_equal_closed(kPi / 10);
    CHECK(std::fabs(mid.total - 0.284) < 5e-4);
    CHECK(std::fabs(mid.total - (-2.0 / 3.0 + std::cos(kPi / 10))) < 1e-12);
    const auto zero = p_opposite_equal_closed(0.0);
    CHECK(zero.p2 == 0.0);
    CHECK(std::fabs(zero.total - 0.2378418305208070) < 1e-14);
    CHECK_THROWS_AS(p_opposite_equal_closed(-1e-9), std::domain_error);
    CHECK_THROWS_AS(p_opposite_equal_closed(kPi / 5 + 1e-9), std::domain_error);

    for (int i = 0; i <= 200; ++i) {
        const double nu = kNuMax * i / 200;
        const auto p = p_opposite_equal_closed(nu);
        CHECK(std::fabs(p.total - (p.p1 + p.p2)) < 1e-12);
        CHECK(std::fabs(p.total - p_opposite_equal_reference(nu)) < 1e-12);
        CHECK(std::fabs(p.total - p_opposite_equal_closed(kNuMax - nu).total) < 1e-12);
        for (double v : {p.p1, p.p2, p.total}) {
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
        }
    }
}

TEST_CASE("closed form agrees with quadrature") {
    CHECK(std::fabs(p_opposite_equal_quadrature(kPi / 10).total - 0.284389849628487) < 1e-8);
    CHECK(p_opposite_equal_quadrature(kPi / 5).p1 == 0.0);
    for (int i = 0; i < 200; ++i) {
        const double nu = kNuMax * i / 199;
        const auto c = p_opposite_equal_closed(nu);
        const auto q = p_opposite_equal_quadrature(nu);
        CHECK(std::fabs(c.p1 - q.p1) < 1e-8);
        CHECK(std::fabs(c.p2 - q.p2) < 1e-8);
        CHECK(std::fabs(c.total - q.total) < 1e-8);
    }
}

TEST_CASE("integrate") {
    CHECK(integrate([](double x) { return std::sin(x); }, 0, kPi).value == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(integrate([](double) { return 1.0; }, 1.0, 1.0).value == 0.0);
}

TEST_CASE("extrema of the nu curve") {
    const auto e = find_extrema_of_nu_curve(1000);
    CHECK(std::fabs(e.nu_max - kPi / 10) < 1e-6);
    CHECK(std::fabs(e.p_max - 0.284389849628487) < 1e-12);
    REQUIRE(e.nu_min.size() == 2);
    CHECK(e.nu_min.front() == 0.0);
    CHECK(std::fabs(e.nu_min.back() - kPi / 5) < 1e-12);
    CHECK(std::fabs(e.p_min - 0.2378418305208070) < 1e-12);
    CHECK_THROWS_AS(find_extrema_of_nu_curve(99), std::invalid_argument);
}

TEST_CASE("stated numbers against the formulas") {
    const auto claim = nu_curve_minimum_claim();
    CHECK(claim.claimed == 0.071);
    CHECK(std::fabs(claim.computed - 0.2378418305208070) < 1e-12);
    CHECK(std::fabs(claim.discrepancy()) > 0.1);
    const auto vt = visibility_threshold_claim();
    CHECK(vt.claimed == 0.5399);
    CHECK(std::fabs(vt.discrepancy()) < 0.005);
    CHECK(std::fabs(vt.discrepancy()) > 1e-4);
}

TEST_CASE("per-theta audit") {
    const Angle a(kPi / 2);
    const Angle b(0);
    const std::vector<double> thetas{0.35 * kPi, 0.45 * kPi};
    const auto rows = per_theta_consistency_audit(a, b, thetas, protocol::kNoFlip);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].p_equal == 1.0);
    CHECK(rows[0].p_anti_opposite == doctest::Approx(0.3 * kPi * std::sin(kPi / 20)));
    CHECK(rows[0].violation);
    // theta = 0.45pi: Bob at 0 crosses gamma_1, Bob at pi sits with Alice
    const double w = geometry::arc_distance(b, geometry::SlotSystem::gamma(0.45 * kPi).boundary(1));
    CHECK(w == doctest::Approx(kPi / 20));
    CHECK(rows[1].p_equal == doctest::Approx(1 - 0.3 * kPi * std::sin(w)));
    CHECK(rows[1].p_anti_opposite == 0.0);
    CHECK(rows[1].violation);

    const std::vector<double> parallel{0.1 * kPi};
    const auto ok = per_theta_consistency_audit(Angle(0), Angle(0), parallel, protocol::kCyclicFlip);
    CHECK(ok[0].p_equal == 1.0);
    CHECK(ok[0].p_anti_opposite == 1.0);
    CHECK_FALSE(ok[0].violation);

    // every point of [0.3pi, 0.5pi] is flagged in this geometry
    std::vector<double> grid;
    for (int i = 0; i <= 40; ++i) grid.push_back(0.3 * kPi + 0.2 * kPi * i / 40);
    for (const auto& r : per_theta_consistency_audit(a, b, grid, protocol::kNoFlip)) {
        CHECK(r.violation);
    }
}

TEST_CASE("two-Bob quadrature over the anomaly window reproduces the components") {
    for (int i = 0; i <= 10; ++i) {
        const double nu = kNuMax * i / 10;
        const auto w = anomaly_window(nu);
        const double in = two_bob_equal_over(alice_setting_for_nu(nu), Angle(0), w.lo, w.hi,
                                             protocol::kNoFlip, protocol::CoinMode::independent);
        CHECK(std::fabs(in - p_opposite_equal_closed(nu).total) < 1e-8);
    }
    const double full = two_bob_equal_full_theta(Angle(kPi / 2), Angle(0), protocol::kNoFlip,
                                                 protocol::CoinMode::independent);
    CHECK(full == doctest::Approx(0.631167).epsilon(1e-5));
    CHECK(two_bob_equal_full_theta(Angle(kPi / 2), Angle(0), protocol::kCyclicFlip,
                                   protocol::CoinMode::shared) == 0.0);
}

TEST_CASE("visibility") {
    const auto r = visibility_report(0.99, kPi / 10);
    CHECK(std::fabs(r.p_effective - 0.2787) < 1e-4);
    CHECK(std::fabs(r.p_effective - 0.2787304916208800) < 1e-12);
    CHECK(std::fabs(visibility_threshold(kPi / 10) - 0.5396160327593464) < 1e-12);
    CHECK(std::fabs(visibility_threshold(0.0) - 0.5835921350012618) < 1e-12);
    CHECK(visibility_report(1.0, 0.2).p_peff_total == doctest::Approx(p_opposite_equal_closed(0.2).total));
    CHECK(visibility_report(0.5, kPi / 10).p_peff_total == 0.0);
    CHECK(visibility_report(visibility_threshold(kPi / 10), kPi / 10).p_peff_total == 0.0);
    CHECK_THROWS_AS(visibility_report(1.01, 0.1), std::domain_error);
    CHECK_THROWS_AS(visibility_report(0.5, 1.0), std::domain_error);

    // the threshold falls as P_total rises
    double prev_p = -1;
    double prev_v = 2;
    for (int i = 0; i <= 50; ++i) {
        const double nu = kNuMax / 2 * i / 50;
        const double p = p_opposite_equal_closed(nu).total;
        const double v = visibility_threshold(nu);
        CHECK(p > prev_p);
        CHECK(v < prev_v);
        CHECK(std::fabs(v - visibility_threshold_iterative(nu)) < 1e-10);
        prev_p = p;
        prev_v = v;
    }
}
