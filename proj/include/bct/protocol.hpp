#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "bct/geometry.hpp"
#include "bct/qm_oracle.hpp"
#include "bct/rng.hpp"

namespace bct::protocol {

using geometry::Angle;
using qm::Outcome;

/// How Bob decides that his setting is too far from Alice's (step 2).
enum class FlipRule {
    cyclic_distance,      ///< min(|ja-jb|, 10-|ja-jb|) > 2
    absolute_difference,  ///< |ja-jb| > 2
    disabled,             ///< never flip; Bob2 in the opposite-axes geometry stays put
};

/// What a fired flip does to the rest of Bob's procedure.
enum class FlipSemantics {
    continue_then_negate,      ///< evaluate steps 3-4 at b+pi, negate the result
    terminate_with_negated_c,  ///< output -c immediately
};

struct Strategy {
    FlipRule flip_rule = FlipRule::disabled;
    FlipSemantics flip_semantics = FlipSemantics::continue_then_negate;

    friend constexpr bool operator==(const Strategy&, const Strategy&) = default;
};

/// Flips disabled: Bob evaluates every setting as given.
inline constexpr Strategy kNoFlip{FlipRule::disabled, FlipSemantics::continue_then_negate};
inline constexpr Strategy kCyclicFlip{FlipRule::cyclic_distance, FlipSemantics::continue_then_negate};
inline constexpr Strategy kAbsoluteFlip{FlipRule::absolute_difference,
                                        FlipSemantics::continue_then_negate};

std::string_view to_string(FlipRule rule);
std::string_view to_string(FlipSemantics semantics);
/// e.g. "cyclic-flip/continue"; "paper-iic" when flips are disabled.
std::string describe(const Strategy& strategy);

FlipRule parse_flip_rule(std::string_view name);
FlipSemantics parse_flip_semantics(std::string_view name);

/// Shared randomness of one round.
struct HiddenState {
    Outcome c = Outcome::plus();
    geometry::CellPartition cells{0.0};

    double theta() const { return cells.theta(); }
    const geometry::SlotSystem& beta() const { return cells.beta(); }
    const geometry::SlotSystem& gamma() const { return cells.gamma(); }
};

/// Builds the hidden state for a given (c, theta); theta in [0, 3pi/5).
HiddenState make_hidden(Outcome c, double theta);

/// c then theta, both uniform.
HiddenState draw_hidden(Rng& rng);

/// Fixed theta, fair-coin c; for conditioned-theta diagnostics.
HiddenState draw_hidden_at(double theta, Rng& rng);

/// Alice's 4-bit message: her cell in the 16-cell partition.
struct SlotMessage {
    int cell = 0;
    geometry::SlotTriple slots;

    std::uint8_t wire() const { return static_cast<std::uint8_t>(cell & 0x0F); }
    /// e.g. "cell=5 alpha=2 beta=0 gamma=1"
    std::string debug_string() const;
};

/// Rebuilds a message from its 4-bit wire value; throws std::invalid_argument
/// if the cell is empty for this theta.
SlotMessage decode_message(std::uint8_t wire, const HiddenState& hidden);

struct AliceResult {
    Outcome output;
    SlotMessage message;
};

AliceResult alice_round(Angle a, const HiddenState& hidden);

enum class Branch {
    same_slot,
    cross_slot,
    flipped_same_slot,
    flipped_cross_slot,
    flipped_terminated,
};

std::string_view to_string(Branch branch);

/// Everything Bob decides before looking at the coin. Deterministic in
/// (b, message, hidden, strategy).
struct BobPlan {
    Angle b;                    ///< setting as given
    Angle evaluated;            ///< setting after any flip
    int alice_alpha = 0;
    int bob_alpha = 0;          ///< alpha slot of `b`
    bool flipped = false;
    bool negate = false;
    geometry::SlotKind system = geometry::SlotKind::beta;
    Branch branch = Branch::same_slot;
    double u = 0.0;             ///< distance to the crossing boundary (cross-slot only)
    Angle boundary;             ///< crossing boundary (cross-slot only)
    double acceptance = 1.0;    ///< P(pre-negation output == c)
    bool clamped = false;
    bool multiple_boundaries = false;

    /// P(c_B == c) over the coin.
    double prob_equal_c() const;

    /// Bob's output for this coin; coin must be in [0, 1).
    Outcome resolve(Outcome c, double coin) const;
};

/// Steps 2-4 without the coin. Throws std::invalid_argument when the message
/// does not decode to its own slot triple under this hidden state.
BobPlan plan_bob(Angle b, const SlotMessage& message, const HiddenState& hidden,
                 const Strategy& strategy);

/// One round's full audit trail.
struct TrialRecord {
    Angle a;
    Angle b;
    Outcome c = Outcome::plus();
    double theta = 0.0;
    SlotMessage message;
    double coin = 0.0;
    bool coin_used = false;
    Outcome alice = Outcome::plus();
    Outcome bob = Outcome::plus();
    Branch branch = Branch::same_slot;
    double u = 0.0;
    double acceptance = 1.0;
    bool clamped = false;
    bool multiple_boundaries = false;
};

/// One JSON object, no trailing newline.
std::string to_json(const TrialRecord& record);

struct BobResult {
    Outcome output;
    TrialRecord record;  ///< Alice-side fields are left default
};

/// Bob's procedure with one coin drawn from rng.
BobResult bob_round(Angle b, const SlotMessage& message, const HiddenState& hidden, Rng& rng,
                    const Strategy& strategy);

/// Same as bob_round with the coin supplied.
BobResult bob_round_with_coin(Angle b, const SlotMessage& message, const HiddenState& hidden,
                              double coin, const Strategy& strategy);

/// Recomputes Bob's output from a record's stored hidden state and coin.
Outcome replay_bob(const TrialRecord& record, const Strategy& strategy);

struct TrialResult {
    Outcome alice;
    Outcome bob;
    TrialRecord record;
};

TrialResult bct_trial(Angle a, Angle b, Rng& rng, const Strategy& strategy);

/// bct_trial with theta fixed instead of drawn.
TrialResult bct_trial_at(Angle a, Angle b, double theta, Rng& rng, const Strategy& strategy);

/// Black-box view of the protocol: two settings in, two outcomes out.
qm::OutcomePair nbct_trial(Angle a, Angle b, Rng& rng, const Strategy& strategy);

/// Reusable nonlocal box bound to a strategy and random source.
class NonlocalBox {
public:
    NonlocalBox(const Strategy& strategy, Rng& rng) : strategy_(strategy), rng_(&rng) {}

    qm::OutcomePair operator()(Angle a, Angle b) { return nbct_trial(a, b, *rng_, strategy_); }

private:
    Strategy strategy_;
    Rng* rng_;
};

enum class CoinMode { independent, shared };

std::string_view to_string(CoinMode mode);
CoinMode parse_coin_mode(std::string_view name);

struct TwoBobResult {
    Outcome alice;
    Outcome bob1;
    Outcome bob2;
    TrialRecord record1;  ///< Bob at b1
    TrialRecord record2;  ///< Bob at b1 + pi
};

/// One hidden draw and one message, Bob evaluated at b1 and at b1 + pi.
TwoBobResult two_bob_trial(Angle a, Angle b1, Rng& rng, const Strategy& strategy,
                           CoinMode coin_mode);

/// two_bob_trial with theta fixed.
TwoBobResult two_bob_trial_at(Angle a, Angle b1, double theta, Rng& rng,
                              const Strategy& strategy, CoinMode coin_mode);

/// Exact P(c_B1 == c_B2) for the two plans at a fixed hidden state, over the
/// step-4 coin(s).
double prob_outputs_equal(const BobPlan& first, const BobPlan& second, CoinMode coin_mode);

}  // namespace bct::protocol
