#include "bct/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace bct::protocol {

namespace {

constexpr double kAcceptanceSlope = 3.0 * geometry::kPi / 10.0;

bool uses_gamma(int alpha_slot) {
    // alpha slots 7, 8, 9, 0, 1
    return alpha_slot >= 7 || alpha_slot <= 1;
}

bool is_cross(Branch branch) {
    return branch == Branch::cross_slot || branch == Branch::flipped_cross_slot;
}

double clamp_theta(double theta) {
    // uniform() * range may round up to range itself.
    return theta < geometry::kThetaRange ? theta : std::nextafter(geometry::kThetaRange, 0.0);
}

}  // namespace

std::string_view to_string(FlipRule rule) {
    switch (rule) {
        case FlipRule::cyclic_distance: return "cyclic-flip";
        case FlipRule::absolute_difference: return "abs-flip";
        case FlipRule::disabled: return "paper-iic";
    }
    return "?";
}

std::string_view to_string(FlipSemantics semantics) {
    switch (semantics) {
        case FlipSemantics::continue_then_negate: return "continue";
        case FlipSemantics::terminate_with_negated_c: return "terminate";
    }
    return "?";
}

std::string describe(const Strategy& strategy) {
    std::string out(to_string(strategy.flip_rule));
    if (strategy.flip_rule != FlipRule::disabled) {
        out += '/';
        out += to_string(strategy.flip_semantics);
    }
    return out;
}

FlipRule parse_flip_rule(std::string_view name) {
    if (name == "cyclic-flip" || name == "cyclic-distance") return FlipRule::cyclic_distance;
    if (name == "abs-flip" || name == "absolute-difference") return FlipRule::absolute_difference;
    if (name == "paper-iic" || name == "disabled") return FlipRule::disabled;
    throw std::invalid_argument("unknown strategy '" + std::string(name) + "'");
}

FlipSemantics parse_flip_semantics(std::string_view name) {
    if (name == "continue" || name == "continue-then-negate") return FlipSemantics::continue_then_negate;
    if (name == "terminate" || name == "terminate-with-negated-c") {
        return FlipSemantics::terminate_with_negated_c;
    }
    throw std::invalid_argument("unknown flip semantics '" + std::string(name) + "'");
}

std::string_view to_string(CoinMode mode) {
    return mode == CoinMode::shared ? "shared" : "independent";
}

CoinMode parse_coin_mode(std::string_view name) {
    if (name == "independent") return CoinMode::independent;
    if (name == "shared") return CoinMode::shared;
    throw std::invalid_argument("unknown coin mode '" + std::string(name) + "'");
}

std::string_view to_string(Branch branch) {
    switch (branch) {
        case Branch::same_slot: return "same-slot";
        case Branch::cross_slot: return "cross-slot";
        case Branch::flipped_same_slot: return "flipped-same-slot";
        case Branch::flipped_cross_slot: return "flipped-cross-slot";
        case Branch::flipped_terminated: return "flipped-terminated";
    }
    return "?";
}

HiddenState make_hidden(Outcome c, double theta) {
    HiddenState h;
    h.c = c;
    h.cells = geometry::CellPartition(theta);
    return h;
}

HiddenState draw_hidden(Rng& rng) {
    const Outcome c = Outcome::from_bit(rng.uniform() < 0.5);
    const double theta = clamp_theta(rng.uniform() * geometry::kThetaRange);
    return make_hidden(c, theta);
}

HiddenState draw_hidden_at(double theta, Rng& rng) {
    const Outcome c = Outcome::from_bit(rng.uniform() < 0.5);
    return make_hidden(c, theta);
}

std::string SlotMessage::debug_string() const {
    std::ostringstream os;
    os << "cell=" << cell << " alpha=" << slots.alpha << " beta=" << slots.beta
       << " gamma=" << slots.gamma;
    return os.str();
}

SlotMessage decode_message(std::uint8_t wire, const HiddenState& hidden) {
    const int cell = wire & 0x0F;
    const auto slots = hidden.cells.decode(cell);
    if (!slots) {
        throw std::invalid_argument("message cell " + std::to_string(cell) +
                                    " is empty for this theta");
    }
    return SlotMessage{cell, *slots};
}

AliceResult alice_round(Angle a, const HiddenState& hidden) {
    const int cell = hidden.cells.cell_of(a);
    return {hidden.c, SlotMessage{cell, *hidden.cells.decode(cell)}};
}

double BobPlan::prob_equal_c() const { return negate ? 1.0 - acceptance : acceptance; }

Outcome BobPlan::resolve(Outcome c, double coin) const {
    const Outcome pre = coin < acceptance ? c : -c;
    return negate ? -pre : pre;
}

BobPlan plan_bob(Angle b, const SlotMessage& message, const HiddenState& hidden,
                 const Strategy& strategy) {
    const auto decoded = hidden.cells.decode(message.cell);
    if (!decoded || *decoded != message.slots) {
        throw std::invalid_argument("message {" + message.debug_string() +
                                    "} is inconsistent with theta=" +
                                    std::to_string(hidden.theta()));
    }

    BobPlan plan;
    plan.b = b;
    plan.evaluated = b;
    plan.alice_alpha = message.slots.alpha;
    plan.bob_alpha = hidden.cells.alpha().slot_index(b);

    // Step 2.
    bool fire = false;
    switch (strategy.flip_rule) {
        case FlipRule::cyclic_distance:
            fire = geometry::alpha_slot_cyclic_difference(plan.alice_alpha, plan.bob_alpha) > 2;
            break;
        case FlipRule::absolute_difference:
            fire = geometry::alpha_slot_absolute_difference(plan.alice_alpha, plan.bob_alpha) > 2;
            break;
        case FlipRule::disabled:
            break;
    }
    if (fire) {
        plan.flipped = true;
        if (strategy.flip_semantics == FlipSemantics::terminate_with_negated_c) {
            plan.branch = Branch::flipped_terminated;
            plan.acceptance = 0.0;
            return plan;
        }
        plan.evaluated = b.opposite();
        plan.negate = true;
    }

    // Step 3.
    const int evaluated_alpha = hidden.cells.alpha().slot_index(plan.evaluated);
    plan.system = uses_gamma(evaluated_alpha) ? geometry::SlotKind::gamma : geometry::SlotKind::beta;
    const geometry::SlotSystem& system = hidden.cells.system(plan.system);
    const int alice_slot =
        plan.system == geometry::SlotKind::gamma ? message.slots.gamma : message.slots.beta;

    // Step 4.
    if (system.slot_index(plan.evaluated) == alice_slot) {
        plan.branch = plan.flipped ? Branch::flipped_same_slot : Branch::same_slot;
        plan.acceptance = 1.0;
        return plan;
    }
    plan.branch = plan.flipped ? Branch::flipped_cross_slot : Branch::cross_slot;
    const Angle alice_side = hidden.cells.representative(message.cell);
    const auto crossing = geometry::boundary_between(alice_side, plan.evaluated, system);
    // Slots differ, so a crossing always exists.
    plan.boundary = crossing->boundary;
    plan.multiple_boundaries = crossing->multiple;
    plan.u = geometry::arc_distance(plan.evaluated, plan.boundary);
    const double raw = 1.0 - kAcceptanceSlope * std::sin(plan.u);
    plan.acceptance = std::clamp(raw, 0.0, 1.0);
    plan.clamped = plan.acceptance != raw;
    return plan;
}

namespace {

TrialRecord record_from(const BobPlan& plan, const SlotMessage& message, const HiddenState& hidden,
                        double coin, Outcome output) {
    TrialRecord r;
    r.b = plan.b;
    r.c = hidden.c;
    r.theta = hidden.theta();
    r.message = message;
    r.coin = coin;
    r.coin_used = is_cross(plan.branch);
    r.alice = hidden.c;
    r.bob = output;
    r.branch = plan.branch;
    r.u = plan.u;
    r.acceptance = plan.acceptance;
    r.clamped = plan.clamped;
    r.multiple_boundaries = plan.multiple_boundaries;
    return r;
}

}  // namespace

BobResult bob_round_with_coin(Angle b, const SlotMessage& message, const HiddenState& hidden,
                              double coin, const Strategy& strategy) {
    const BobPlan plan = plan_bob(b, message, hidden, strategy);
    const Outcome out = plan.resolve(hidden.c, coin);
    return {out, record_from(plan, message, hidden, coin, out)};
}

BobResult bob_round(Angle b, const SlotMessage& message, const HiddenState& hidden, Rng& rng,
                    const Strategy& strategy) {
    return bob_round_with_coin(b, message, hidden, rng.uniform(), strategy);
}

Outcome replay_bob(const TrialRecord& record, const Strategy& strategy) {
    const HiddenState hidden = make_hidden(record.c, record.theta);
    return bob_round_with_coin(record.b, record.message, hidden, record.coin, strategy).output;
}

std::string to_json(const TrialRecord& r) {
    nlohmann::ordered_json j;
    j["a"] = r.a.radians();
    j["b"] = r.b.radians();
    j["c"] = r.c.value();
    j["theta"] = r.theta;
    j["cell"] = r.message.cell;
    j["slots"] = {r.message.slots.alpha, r.message.slots.beta, r.message.slots.gamma};
    j["coin"] = r.coin;
    j["coin_used"] = r.coin_used;
    j["c_A"] = r.alice.value();
    j["c_B"] = r.bob.value();
    j["branch"] = std::string(to_string(r.branch));
    j["u"] = r.u;
    j["acceptance"] = r.acceptance;
    j["clamped"] = r.clamped;
    j["multiple_boundaries"] = r.multiple_boundaries;
    return j.dump();
}

namespace {

TrialResult run_trial(Angle a, Angle b, const HiddenState& hidden, Rng& rng,
                      const Strategy& strategy) {
    const AliceResult alice = alice_round(a, hidden);
    BobResult bob = bob_round(b, alice.message, hidden, rng, strategy);
    bob.record.a = a;
    bob.record.alice = alice.output;
    return {alice.output, bob.output, bob.record};
}

TwoBobResult run_two_bob(Angle a, Angle b1, const HiddenState& hidden, Rng& rng,
                         const Strategy& strategy, CoinMode coin_mode) {
    const AliceResult alice = alice_round(a, hidden);
    const double coin1 = rng.uniform();
    const double coin2 = coin_mode == CoinMode::shared ? coin1 : rng.uniform();
    BobResult first = bob_round_with_coin(b1, alice.message, hidden, coin1, strategy);
    BobResult second = bob_round_with_coin(b1.opposite(), alice.message, hidden, coin2, strategy);
    first.record.a = a;
    second.record.a = a;
    return {alice.output, first.output, second.output, first.record, second.record};
}

}  // namespace

TrialResult bct_trial(Angle a, Angle b, Rng& rng, const Strategy& strategy) {
    const HiddenState hidden = draw_hidden(rng);
    return run_trial(a, b, hidden, rng, strategy);
}

TrialResult bct_trial_at(Angle a, Angle b, double theta, Rng& rng, const Strategy& strategy) {
    const HiddenState hidden = draw_hidden_at(theta, rng);
    return run_trial(a, b, hidden, rng, strategy);
}

qm::OutcomePair nbct_trial(Angle a, Angle b, Rng& rng, const Strategy& strategy) {
    const TrialResult t = bct_trial(a, b, rng, strategy);
    return {t.alice, t.bob};
}

TwoBobResult two_bob_trial(Angle a, Angle b1, Rng& rng, const Strategy& strategy,
                           CoinMode coin_mode) {
    const HiddenState hidden = draw_hidden(rng);
    return run_two_bob(a, b1, hidden, rng, strategy, coin_mode);
}

TwoBobResult two_bob_trial_at(Angle a, Angle b1, double theta, Rng& rng,
                              const Strategy& strategy, CoinMode coin_mode) {
    const HiddenState hidden = draw_hidden_at(theta, rng);
    return run_two_bob(a, b1, hidden, rng, strategy, coin_mode);
}

double prob_outputs_equal(const BobPlan& first, const BobPlan& second, CoinMode coin_mode) {
    if (coin_mode == CoinMode::independent) {
        const double p = first.prob_equal_c();
        const double q = second.prob_equal_c();
        return p * q + (1.0 - p) * (1.0 - q);
    }
    // With one shared coin, output == +c exactly on [0, acc) or, when negated,
    // on [acc, 1).
    struct Interval {
        double lo;
        double hi;
    };
    const auto positive_set = [](const BobPlan& plan) {
        return plan.negate ? Interval{plan.acceptance, 1.0} : Interval{0.0, plan.acceptance};
    };
    const Interval s = positive_set(first);
    const Interval t = positive_set(second);
    const double both = std::max(0.0, std::min(s.hi, t.hi) - std::max(s.lo, t.lo));
    const double neither = 1.0 - (s.hi - s.lo) - (t.hi - t.lo) + both;
    return both + neither;
}

}  // namespace bct::protocol
