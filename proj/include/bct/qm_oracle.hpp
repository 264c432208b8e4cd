#pragma once

#include <utility>

#include "bct/geometry.hpp"
#include "bct/rng.hpp"

namespace bct::qm {

/// A +/-1 measurement result.
class Outcome {
public:
    static constexpr Outcome plus() { return Outcome(1); }
    static constexpr Outcome minus() { return Outcome(-1); }
    static constexpr Outcome from_bit(bool positive) { return positive ? plus() : minus(); }

    constexpr int value() const { return value_; }
    constexpr bool positive() const { return value_ > 0; }
    constexpr Outcome operator-() const { return Outcome(-value_); }

    friend constexpr bool operator==(Outcome, Outcome) = default;

private:
    constexpr explicit Outcome(int v) : value_(v) {}
    int value_;
};

struct OutcomePair {
    Outcome alice;
    Outcome bob;
};

/// P(c_A = c_B) for |phi+> measured along planar directions a and b.
double qm_prob_equal(geometry::Angle a, geometry::Angle b);

/// Samples (c_A, c_B): c_A is a fair coin, c_B repeats it with qm_prob_equal.
OutcomePair qm_sample(geometry::Angle a, geometry::Angle b, Rng& rng);

/// True when reversing b complements the equal-output probability to 1e-12.
bool qm_flip_covariance_check(geometry::Angle a, geometry::Angle b);

}  // namespace bct::qm
