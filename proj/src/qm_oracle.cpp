#include "bct/qm_oracle.hpp"

#include <cmath>

namespace bct::qm {

double qm_prob_equal(geometry::Angle a, geometry::Angle b) {
    const double half = 0.5 * geometry::arc_distance(a, b);
    const double c = std::cos(half);
    return c * c;
}

OutcomePair qm_sample(geometry::Angle a, geometry::Angle b, Rng& rng) {
    const Outcome alice = Outcome::from_bit(rng.uniform() < 0.5);
    const Outcome bob = rng.bernoulli(qm_prob_equal(a, b)) ? alice : -alice;
    return {alice, bob};
}

bool qm_flip_covariance_check(geometry::Angle a, geometry::Angle b) {
    const double direct = qm_prob_equal(a, b);
    const double reversed = qm_prob_equal(a, b.opposite());
    return std::fabs(reversed - (1.0 - direct)) <= 1e-12;
}

}  // namespace bct::qm
