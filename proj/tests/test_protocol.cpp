#include <array>
#include <cmath>
#include <stdexcept>

#include "bct/analysis.hpp"
#include "bct/protocol.hpp"
#include "doctest.h"
#include "json.hpp"

using namespace bct;
using namespace bct::protocol;
using geometry::Angle;
using geometry::kPi;
using qm::Outcome;

namespace {

constexpr double kTheta = 0.35 * kPi;
const double kBob2Accept = 1.0 - 0.3 * kPi * std::sin(kPi / 20);  // 0.8526

double se(double p, int n) { return std::sqrt(p * (1 - p) / n); }

const std::array<Strategy, 5> kAllStrategies = {
    kNoFlip,
    Strategy{FlipRule::cyclic_distance, FlipSemantics::continue_then_negate},
    Strategy{FlipRule::cyclic_distance, FlipSemantics::terminate_with_negated_c},
    Strategy{FlipRule::absolute_difference, FlipSemantics::continue_then_negate},
    Strategy{FlipRule::absolute_difference, FlipSemantics::terminate_with_negated_c},
};

}  // namespace

TEST_CASE("draw_hidden is uniform and in range") {
    Rng rng(1);
    const int n = 1'000'000;
    double theta_sum = 0;
    int plus = 0;
    for (int i = 0; i < n; ++i) {
        const auto h = draw_hidden(rng);
        REQUIRE(h.theta() >= 0.0);
        REQUIRE(h.theta() < geometry::kThetaRange);
        theta_sum += h.theta();
        plus += h.c.positive();
    }
    CHECK(std::fabs(theta_sum / n - 0.3 * kPi) < 0.002);
    CHECK(std::fabs(plus / double(n) - 0.5) < 0.002);
}

TEST_CASE("alice_round") {
    const auto h = make_hidden(Outcome::minus(), kTheta);
    const auto r = alice_round(Angle(kPi / 2), h);
    CHECK(r.message.slots == geometry::SlotTriple{2, 0, 1});
    CHECK(r.output == h.c);
    CHECK(alice_round(Angle(kPi / 2), make_hidden(Outcome::plus(), 0.45 * kPi)).message.slots ==
          geometry::SlotTriple{2, 0, 1});
}

TEST_CASE("message travels as its 4-bit cell") {
    Rng rng(2);
    for (int i = 0; i < 2000; ++i) {
        const auto h = draw_hidden(rng);
        const auto m = alice_round(Angle(rng.uniform() * 7), h).message;
        CHECK(m.wire() < 16);
        const auto back = decode_message(m.wire(), h);
        CHECK(back.cell == m.cell);
        CHECK(back.slots == m.slots);
    }
    // theta = pi/5 leaves empty cells; decoding one is rejected
    const auto h = make_hidden(Outcome::plus(), kPi / 5);
    int rejected = 0;
    for (std::uint8_t w = 0; w < 16; ++w) {
        try {
            decode_message(w, h);
        } catch (const std::invalid_argument&) {
            ++rejected;
        }
    }
    CHECK(rejected == 6);
}

TEST_CASE("Bob's procedure in the opposite-axes geometry") {
    const auto h = make_hidden(Outcome::plus(), kTheta);
    const auto msg = alice_round(Angle(kPi / 2), h).message;

    SUBCASE("Bob at 0 answers c surely") {
        const auto plan = plan_bob(Angle(0), msg, h, kNoFlip);
        CHECK(plan.system == geometry::SlotKind::gamma);
        CHECK(plan.branch == Branch::same_slot);
        CHECK(plan.prob_equal_c() == 1.0);
        for (double coin : {0.0, 0.5, 0.999999}) {
            CHECK(bob_round_with_coin(Angle(0), msg, h, coin, kNoFlip).output == h.c);
        }
    }
    SUBCASE("Bob at pi crosses beta_1 at distance pi/20") {
        const auto plan = plan_bob(Angle(kPi), msg, h, kNoFlip);
        CHECK(plan.system == geometry::SlotKind::beta);
        CHECK(plan.branch == Branch::cross_slot);
        CHECK(plan.boundary.radians() == doctest::Approx(0.95 * kPi));
        CHECK(plan.u == doctest::Approx(kPi / 20));
        CHECK(plan.acceptance == doctest::Approx(0.8526).epsilon(1e-4));
        Rng rng(4);
        const int n = 100'000;
        int equal = 0;
        for (int i = 0; i < n; ++i) equal += bob_round(Angle(kPi), msg, h, rng, kNoFlip).output == h.c;
        CHECK(std::fabs(equal / double(n) - kBob2Accept) < 4 * se(kBob2Accept, n));
    }
    SUBCASE("cyclic flip replays the Bob-at-0 branch and negates") {
        const auto plan = plan_bob(Angle(kPi), msg, h, kCyclicFlip);
        CHECK(plan.flipped);
        CHECK(plan.negate);
        CHECK(plan.evaluated == Angle(0));
        CHECK(plan.branch == Branch::flipped_same_slot);
        for (double coin : {0.0, 0.3, 0.9}) {
            CHECK(bob_round_with_coin(Angle(kPi), msg, h, coin, kCyclicFlip).output == -h.c);
        }
    }
    SUBCASE("terminate semantics outputs -c without evaluating") {
        const Strategy s{FlipRule::cyclic_distance, FlipSemantics::terminate_with_negated_c};
        const auto plan = plan_bob(Angle(kPi), msg, h, s);
        CHECK(plan.branch == Branch::flipped_terminated);
        CHECK(plan.prob_equal_c() == 0.0);
    }
}

TEST_CASE("inconsistent message is rejected") {
    const auto h = make_hidden(Outcome::plus(), kTheta);
    auto msg = alice_round(Angle(kPi / 2), h).message;
    msg.slots.beta = 2;
    CHECK_THROWS_AS(plan_bob(Angle(0), msg, h, kNoFlip), std::invalid_argument);
    Rng rng(1);
    CHECK_THROWS_AS(bob_round(Angle(0), msg, h, rng, kNoFlip), std::invalid_argument);
}

TEST_CASE("replay from a trial record is exact") {
    Rng rng(6);
    for (const auto& s : kAllStrategies) {
        for (int i = 0; i < 3000; ++i) {
            const auto r = bct_trial(Angle(rng.uniform() * 7), Angle(rng.uniform() * 7), rng, s);
            CHECK(replay_bob(r.record, s) == r.bob);
            // the JSON dump carries enough to replay as well
            const auto j = nlohmann::json::parse(to_json(r.record));
            TrialRecord back = r.record;
            back.theta = j["theta"].get<double>();
            back.coin = j["coin"].get<double>();
            back.c = j["c"].get<int>() > 0 ? Outcome::plus() : Outcome::minus();
            back.b = Angle(j["b"].get<double>());
            CHECK(replay_bob(back, s) == r.bob);
            CHECK(j["c_B"].get<int>() == r.bob.value());
        }
    }
}

TEST_CASE("equal settings always agree with flips disabled") {
    Rng rng(8);
    for (double a : {0.0, 0.4, kPi / 2, 2.5, 5.9}) {
        for (int i = 0; i < 200'000; ++i) {
            const auto r = bct_trial(Angle(a), Angle(a), rng, kNoFlip);
            REQUIRE(r.alice == r.bob);
        }
        NonlocalBox box(kNoFlip, rng);
        for (int i = 0; i < 1000; ++i) {
            const auto o = box(Angle(a), Angle(a));
            REQUIRE(o.alice == o.bob);
        }
    }
}

TEST_CASE("orthogonal settings give 1/2 under the calibrated strategy") {
    Rng rng(10);
    const int n = 1'000'000;
    int equal = 0;
    for (int i = 0; i < n; ++i) {
        const auto r = bct_trial(Angle(0), Angle(kPi / 2), rng, kCyclicFlip);
        equal += r.alice == r.bob;
    }
    CHECK(std::fabs(equal / double(n) - 0.5) < 0.005);
}

TEST_CASE("marginals are fair under every strategy") {
    Rng rng(12);
    const int n = 200'000;
    for (const auto& s : kAllStrategies) {
        int a_plus = 0;
        int b_plus = 0;
        for (int i = 0; i < n; ++i) {
            const auto r = bct_trial(Angle(1.0), Angle(2.3), rng, s);
            a_plus += r.alice.positive();
            b_plus += r.bob.positive();
        }
        CHECK(std::fabs(a_plus / double(n) - 0.5) < 4 * se(0.5, n));
        CHECK(std::fabs(b_plus / double(n) - 0.5) < 4 * se(0.5, n));
    }
}

TEST_CASE("black-box joint table matches the protocol's") {
    Rng r1(13);
    Rng r2(14);
    const int n = 1'000'000;
    std::array<int, 4> box{};
    std::array<int, 4> direct{};
    NonlocalBox nbct(kNoFlip, r1);
    for (int i = 0; i < n; ++i) {
        const auto o = nbct(Angle(0), Angle(kPi / 2));
        ++box[o.alice.positive() * 2 + o.bob.positive()];
        const auto t = bct_trial(Angle(0), Angle(kPi / 2), r2, kNoFlip);
        ++direct[t.alice.positive() * 2 + t.bob.positive()];
    }
    for (int k = 0; k < 4; ++k) {
        const double p = 0.5 * (box[k] + direct[k]) / n;
        CHECK(std::fabs(box[k] - direct[k]) / double(n) < 4 * std::sqrt(2.0) * se(p, n));
    }
}

TEST_CASE("two Bobs on opposite axes") {
    const Angle a(kPi / 2);
    const Angle b1(0);

    SUBCASE("conditioned at 0.35pi") {
        Rng rng(15);
        const int n = 100'000;
        int equal = 0;
        for (int i = 0; i < n; ++i) {
            const auto r = two_bob_trial_at(a, b1, kTheta, rng, kNoFlip, CoinMode::independent);
            CHECK(r.bob1 == r.alice);
            equal += r.bob1 == r.bob2;
        }
        CHECK(std::fabs(equal / double(n) - 0.8526) < 0.01);
    }
    SUBCASE("intervals I and III carry 0.284; the full range carries more") {
        Rng rng(16);
        const int n = 1'000'000;
        const auto w = analysis::anomaly_window(kPi / 10);
        int equal = 0;
        int inside = 0;
        for (int i = 0; i < n; ++i) {
            const auto r = two_bob_trial(a, b1, rng, kNoFlip, CoinMode::independent);
            const bool eq = r.bob1 == r.bob2;
            equal += eq;
            inside += eq && r.record1.theta >= w.lo && r.record1.theta <= w.hi;
        }
        CHECK(std::fabs(inside / double(n) - 0.284) < 0.005);
        const double exact = analysis::two_bob_equal_full_theta(a, b1, kNoFlip, CoinMode::independent);
        CHECK(std::fabs(equal / double(n) - exact) < 4 * se(exact, n));
        // the anti-correlation law fails: opposite axes agree with positive probability
        CHECK(equal > 0);
    }
    SUBCASE("cyclic flip with a shared coin makes Bob2 the negation of Bob1") {
        Rng rng(17);
        for (int i = 0; i < 200'000; ++i) {
            const Angle aa(rng.uniform() * 7);
            const Angle bb(rng.uniform() * 7);
            const auto r = two_bob_trial(aa, bb, rng, kCyclicFlip, CoinMode::shared);
            REQUIRE(r.bob2 == -r.bob1);
        }
    }
    SUBCASE("absolute-difference flip can fire for both Bobs") {
        // Alice in alpha slot 0, Bobs in slots 3 and 8: |0-3| and |0-8| both exceed 2,
        // so both flip and the pair behaves like the unflipped one.
        const auto h = make_hidden(Outcome::plus(), 0.5);
        const auto msg = alice_round(Angle(0.1), h).message;
        const auto p1 = plan_bob(Angle(3.5 * kPi / 5), msg, h, kAbsoluteFlip);
        const auto p2 = plan_bob(Angle(8.5 * kPi / 5), msg, h, kAbsoluteFlip);
        CHECK(p1.flipped);
        CHECK(p2.flipped);
        const auto q1 = plan_bob(Angle(3.5 * kPi / 5), msg, h, kNoFlip);
        const auto q2 = plan_bob(Angle(8.5 * kPi / 5), msg, h, kNoFlip);
        CHECK(prob_outputs_equal(p1, p2, CoinMode::shared) == prob_outputs_equal(q1, q2, CoinMode::shared));
    }
}

TEST_CASE("prob_outputs_equal agrees with sampling") {
    Rng rng(18);
    for (const auto coin : {CoinMode::independent, CoinMode::shared}) {
        for (const auto& s : kAllStrategies) {
            const double theta = 0.77;
            const Angle a(2.2);
            const Angle b1(0.4);
            const double p = analysis::two_bob_equal_given_theta(a, b1, theta, s, coin);
            const int n = 50'000;
            int equal = 0;
            for (int i = 0; i < n; ++i) {
                const auto r = two_bob_trial_at(a, b1, theta, rng, s, coin);
                equal += r.bob1 == r.bob2;
            }
            CHECK(std::fabs(equal / double(n) - p) <= 4 * se(p, n) + 1e-12);
        }
    }
}

TEST_CASE("strategy names") {
    CHECK(describe(kNoFlip) == "paper-iic");
    CHECK(describe(kCyclicFlip) == "cyclic-flip/continue");
    CHECK(parse_flip_rule("abs-flip") == FlipRule::absolute_difference);
    CHECK(parse_flip_semantics("terminate") == FlipSemantics::terminate_with_negated_c);
    CHECK(parse_coin_mode("shared") == CoinMode::shared);
    CHECK_THROWS_AS(parse_flip_rule("nope"), std::invalid_argument);
    CHECK_THROWS_AS(parse_coin_mode(""), std::invalid_argument);
}
