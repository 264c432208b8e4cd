#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "bct/geometry.hpp"
#include "bct/protocol.hpp"

namespace bct::analysis {

inline constexpr double kNuMax = geometry::kPi / 5.0;

/// The two theta intervals in which one Bob is surely equal to c while the
/// other is on the cross-slot branch.
enum class Interval { one, two };

/// Equal-output probability contributed by one interval at nu = pi/10:
/// (5/3pi) * integral_0^{pi/10} [1 - (3pi/10) sin u] du.
double p_equal_interval(Interval which);

struct NuCurvePoint {
    double nu = 0.0;
    double p1 = 0.0;     ///< theta in [pi/5 + nu, 2pi/5]
    double p2 = 0.0;     ///< theta in [2pi/5, 2pi/5 + nu]
    double total = 0.0;  ///< p1 + p2
};

/// Component formulas; total is their sum. Throws std::domain_error for nu
/// outside [0, pi/5].
NuCurvePoint p_opposite_equal_closed(double nu);

/// -2/3 + (cos nu + cos(pi/5 - nu))/2, kept separate so the sum of the
/// components can be checked against it.
double p_opposite_equal_reference(double nu);

struct Integral {
    double value = 0.0;
    double error = 0.0;
};

/// Adaptive Gauss-Kronrod over [lo, hi]. Throws std::runtime_error when the
/// error estimate stays above `tolerance`.
Integral integrate(const std::function<double(double)>& f, double lo, double hi,
                   double tolerance = 1e-9);

/// Same components by numerical integration of the acceptance formula.
NuCurvePoint p_opposite_equal_quadrature(double nu);

struct NuExtrema {
    double nu_max = 0.0;
    double p_max = 0.0;
    std::vector<double> nu_min;  ///< every grid point attaining the minimum
    double p_min = 0.0;
};

/// Grid scan over [0, pi/5] plus Brent refinement of the maximum.
/// Throws std::invalid_argument for resolution < 100.
NuExtrema find_extrema_of_nu_curve(int resolution);

/// A stated number next to the value the formula behind it gives.
struct ClaimCheck {
    std::string what;
    double claimed = 0.0;
    double computed = 0.0;

    double discrepancy() const { return claimed - computed; }
};

/// Stated minimum of the nu curve (0.071) against the formula at nu = 0.
ClaimCheck nu_curve_minimum_claim();
/// Stated visibility threshold (53.99%) against the exact root at nu = pi/10.
ClaimCheck visibility_threshold_claim();

struct AuditRow {
    double theta = 0.0;
    double p_equal = 0.0;         ///< P(c_A = c_B | a, b, theta)
    double p_anti_opposite = 0.0; ///< P(c_A = -c_B | a, b + pi, theta)
    bool violation = false;       ///< the two differ by more than 1e-9
};

/// Per-theta check of the anti-correlation law, computed from Bob's branch
/// logic (no sampling). Every theta must lie in [0, 3pi/5).
std::vector<AuditRow> per_theta_consistency_audit(geometry::Angle a, geometry::Angle b,
                                                  std::span<const double> thetas,
                                                  const protocol::Strategy& strategy);

/// Exact P(c_B1 = c_B2) at fixed theta for Bobs at b1 and b1 + pi.
double two_bob_equal_given_theta(geometry::Angle a, geometry::Angle b1, double theta,
                                 const protocol::Strategy& strategy, protocol::CoinMode coin);

/// P(c_B1 = c_B2 and theta in [theta_lo, theta_hi)) with theta uniform on
/// [0, 3pi/5), by piecewise quadrature split at every slot-change point.
double two_bob_equal_over(geometry::Angle a, geometry::Angle b1, double theta_lo,
                          double theta_hi, const protocol::Strategy& strategy,
                          protocol::CoinMode coin);

/// two_bob_equal_over the whole theta range.
double two_bob_equal_full_theta(geometry::Angle a, geometry::Angle b1,
                                const protocol::Strategy& strategy, protocol::CoinMode coin);

/// Theta range [pi/5 + nu, 2pi/5 + nu] covered by intervals I and III.
struct ThetaWindow {
    double lo = 0.0;
    double hi = 0.0;
};
ThetaWindow anomaly_window(double nu);

/// Alice's setting alpha_2 + nu in the frame with b1 = alpha_0 = 0.
geometry::Angle alice_setting_for_nu(double nu);

struct VisibilityReport {
    double visibility = 0.0;
    double nu = 0.0;
    double p_effective = 0.0;   ///< V^2 * P_total(nu)
    double p_peff1 = 0.0;
    double p_peff2 = 0.0;
    double p_peff_total = 0.0;  ///< max{0, p_peff1 + p_peff2}
    double v_threshold = 0.0;
};

/// Throws std::domain_error unless V in [0,1] and nu in [0, pi/5].
VisibilityReport visibility_report(double visibility, double nu);

/// Exact root of V * P_total(nu) - (1 - V)/3 = 0.
double visibility_threshold(double nu);

/// Same root by bracketing (TOMS 748); a cross-check only.
double visibility_threshold_iterative(double nu);

}  // namespace bct::analysis
