#include <cmath>

#include "bct/qm_oracle.hpp"
#include "doctest.h"

using namespace bct;
using geometry::Angle;
using geometry::kPi;

TEST_CASE("qm_prob_equal values") {
    CHECK(qm::qm_prob_equal(Angle(0.7), Angle(0.7)) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(qm::qm_prob_equal(Angle(0.7), Angle(0.7 + kPi)) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(qm::qm_prob_equal(Angle(0), Angle(kPi / 2)) == doctest::Approx(0.5));
}

TEST_CASE("qm_prob_equal symmetry and rotation invariance") {
    Rng rng(3);
    for (int i = 0; i < 1000; ++i) {
        const double a = rng.uniform() * 10 - 5;
        const double b = rng.uniform() * 10 - 5;
        const double r = rng.uniform() * 10 - 5;
        const double p = qm::qm_prob_equal(Angle(a), Angle(b));
        CHECK(std::fabs(p - qm::qm_prob_equal(Angle(b), Angle(a))) < 1e-12);
        CHECK(std::fabs(p - qm::qm_prob_equal(Angle(a + r), Angle(b + r))) < 1e-12);
    }
}

TEST_CASE("flip covariance") {
    CHECK(qm::qm_flip_covariance_check(Angle(0), Angle(kPi / 3)));
    CHECK(qm::qm_flip_covariance_check(Angle(0), Angle(0)));
    CHECK(qm::qm_flip_covariance_check(Angle(kPi / 5), Angle(9 * kPi / 10)));
    for (int i = 0; i < 10; ++i) {
        for (int j = 0; j < 10; ++j) {
            CHECK(qm::qm_flip_covariance_check(Angle(i * 0.6), Angle(j * 0.7)));
        }
    }
}

TEST_CASE("qm_sample") {
    Rng rng(5);
    for (int i = 0; i < 1000; ++i) {
        const auto same = qm::qm_sample(Angle(1.0), Angle(1.0), rng);
        CHECK(same.alice == same.bob);
        const auto opp = qm::qm_sample(Angle(1.0), Angle(1.0 + kPi), rng);
        CHECK(opp.alice == -opp.bob);
    }
    const int n = 1'000'000;
    int equal = 0;
    int alice_plus = 0;
    for (int i = 0; i < n; ++i) {
        const auto s = qm::qm_sample(Angle(0), Angle(kPi / 2), rng);
        equal += s.alice == s.bob;
        alice_plus += s.alice.positive();
    }
    CHECK(std::fabs(equal / double(n) - 0.5) < 0.002);
    CHECK(std::fabs(alice_plus / double(n) - 0.5) < 0.002);
}

TEST_CASE("sampled frequencies match the oracle within 4 standard errors") {
    Rng rng(9);
    const int n = 200'000;
    for (double sep : {0.3, 1.1, 2.0, 2.9}) {
        const double p = qm::qm_prob_equal(Angle(0.4), Angle(0.4 + sep));
        int equal = 0;
        for (int i = 0; i < n; ++i) {
            const auto s = qm::qm_sample(Angle(0.4), Angle(0.4 + sep), rng);
            equal += s.alice == s.bob;
        }
        CHECK(std::fabs(equal / double(n) - p) < 4 * std::sqrt(p * (1 - p) / n));
    }
}

TEST_CASE("Outcome") {
    CHECK(qm::Outcome::plus().value() == 1);
    CHECK(-qm::Outcome::plus() == qm::Outcome::minus());
    CHECK(qm::Outcome::from_bit(false) == qm::Outcome::minus());
}
