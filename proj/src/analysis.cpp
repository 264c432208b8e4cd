#include "bct/analysis.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/roots.hpp>

namespace bct::analysis {

namespace {

using geometry::kPi;

constexpr double kDensity = 5.0 / (3.0 * kPi);  // uniform theta on [0, 3pi/5)
constexpr double kSlope = 3.0 * kPi / 10.0;

// (5/3pi) * integral_0^width [1 - (3pi/10) sin u] du
double acceptance_mass(double width) {
    return kDensity * (width - kSlope * (1.0 - std::cos(width)));
}

void check_nu(double nu) {
    if (!(nu >= 0.0 && nu <= kNuMax)) {
        throw std::domain_error("nu must lie in [0, pi/5], got " + std::to_string(nu));
    }
}

}  // namespace

double p_equal_interval(Interval which) {
    // Both intervals span pi/10 at the symmetric point nu = pi/10.
    (void)which;
    return kDensity * (kPi / 10.0 - kSlope * (1.0 - std::cos(kPi / 10.0)));
}

NuCurvePoint p_opposite_equal_closed(double nu) {
    check_nu(nu);
    NuCurvePoint p;
    p.nu = nu;
    p.p1 = acceptance_mass(kNuMax - nu);
    p.p2 = acceptance_mass(nu);
    p.total = p.p1 + p.p2;
    return p;
}

double p_opposite_equal_reference(double nu) {
    return -2.0 / 3.0 + 0.5 * (std::cos(nu) + std::cos(kNuMax - nu));
}

Integral integrate(const std::function<double(double)>& f, double lo, double hi, double tolerance) {
    if (!(hi > lo)) {
        return {};
    }
    Integral out;
    out.value = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, lo, hi, 15, 1e-12,
                                                                             &out.error);
    if (!(out.error <= tolerance)) {
        throw std::runtime_error("quadrature on [" + std::to_string(lo) + ", " +
                                 std::to_string(hi) + "] did not converge: error estimate " +
                                 std::to_string(out.error));
    }
    return out;
}

NuCurvePoint p_opposite_equal_quadrature(double nu) {
    check_nu(nu);
    const auto integrand = [](double u) { return kDensity * (1.0 - kSlope * std::sin(u)); };
    NuCurvePoint p;
    p.nu = nu;
    p.p1 = integrate(integrand, 0.0, kNuMax - nu).value;
    p.p2 = integrate(integrand, 0.0, nu).value;
    p.total = p.p1 + p.p2;
    return p;
}

NuExtrema find_extrema_of_nu_curve(int resolution) {
    if (resolution < 100) {
        throw std::invalid_argument("nu-curve resolution must be at least 100");
    }
    const auto total = [](double nu) { return p_opposite_equal_closed(nu).total; };
    std::vector<double> grid(static_cast<std::size_t>(resolution) + 1);
    std::vector<double> values(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        grid[i] = kNuMax * static_cast<double>(i) / resolution;
        values[i] = total(grid[i]);
    }
    const auto top = std::max_element(values.begin(), values.end()) - values.begin();
    const double lo = grid[static_cast<std::size_t>(std::max<std::ptrdiff_t>(top - 1, 0))];
    const double hi = grid[std::min<std::size_t>(static_cast<std::size_t>(top) + 1, grid.size() - 1)];
    std::uintmax_t iterations = 200;
    const auto best = boost::math::tools::brent_find_minima(
        [&](double nu) { return -total(nu); }, lo, hi, std::numeric_limits<double>::digits / 2,
        iterations);

    NuExtrema out;
    out.nu_max = best.first;
    out.p_max = -best.second;
    out.p_min = *std::min_element(values.begin(), values.end());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (values[i] - out.p_min <= 1e-12) {
            out.nu_min.push_back(grid[i]);
        }
    }
    return out;
}

ClaimCheck nu_curve_minimum_claim() {
    return {"nu-curve minimum at nu in {0, pi/5}", 0.071, p_opposite_equal_closed(0.0).total};
}

ClaimCheck visibility_threshold_claim() {
    return {"visibility threshold at nu = pi/10", 0.5399, visibility_threshold(kPi / 10.0)};
}

std::vector<AuditRow> per_theta_consistency_audit(geometry::Angle a, geometry::Angle b,
                                                  std::span<const double> thetas,
                                                  const protocol::Strategy& strategy) {
    std::vector<AuditRow> rows;
    rows.reserve(thetas.size());
    for (const double theta : thetas) {
        const auto hidden = protocol::make_hidden(qm::Outcome::plus(), theta);
        const auto message = protocol::alice_round(a, hidden).message;
        const auto direct = protocol::plan_bob(b, message, hidden, strategy);
        const auto reversed = protocol::plan_bob(b.opposite(), message, hidden, strategy);
        AuditRow row;
        row.theta = theta;
        row.p_equal = direct.prob_equal_c();
        row.p_anti_opposite = 1.0 - reversed.prob_equal_c();
        row.violation = std::fabs(row.p_equal - row.p_anti_opposite) > 1e-9;
        rows.push_back(row);
    }
    return rows;
}

double two_bob_equal_given_theta(geometry::Angle a, geometry::Angle b1, double theta,
                                 const protocol::Strategy& strategy, protocol::CoinMode coin) {
    const auto hidden = protocol::make_hidden(qm::Outcome::plus(), theta);
    const auto message = protocol::alice_round(a, hidden).message;
    const auto first = protocol::plan_bob(b1, message, hidden, strategy);
    const auto second = protocol::plan_bob(b1.opposite(), message, hidden, strategy);
    return protocol::prob_outputs_equal(first, second, coin);
}

namespace {

// Identifies the smooth piece of the integrand that theta falls in: Alice's
// cell, and for each Bob the branch, slot system and which boundary (by its
// alpha offset from theta) he measures against.
using PieceKey = std::array<int, 9>;

int boundary_offset(geometry::Angle boundary, double theta) {
    const double steps = geometry::normalize_angle(boundary.radians() - theta).radians() / (kPi / 5.0);
    return static_cast<int>(std::lround(steps)) % 10;
}

PieceKey piece_key(geometry::Angle a, geometry::Angle b1, double theta,
                   const protocol::Strategy& strategy) {
    const auto hidden = protocol::make_hidden(qm::Outcome::plus(), theta);
    const auto message = protocol::alice_round(a, hidden).message;
    PieceKey key{message.cell};
    int k = 1;
    for (const auto b : {b1, b1.opposite()}) {
        const auto plan = protocol::plan_bob(b, message, hidden, strategy);
        key[k++] = static_cast<int>(plan.branch);
        key[k++] = static_cast<int>(plan.system);
        key[k++] = plan.negate;
        key[k++] = plan.u > 0.0 ? boundary_offset(plan.boundary, theta) : -1;
    }
    return key;
}

}  // namespace

double two_bob_equal_over(geometry::Angle a, geometry::Angle b1, double theta_lo,
                          double theta_hi, const protocol::Strategy& strategy,
                          protocol::CoinMode coin) {
    theta_lo = std::max(theta_lo, 0.0);
    theta_hi = std::min(theta_hi, std::nextafter(geometry::kThetaRange, 0.0));
    if (!(theta_hi > theta_lo)) {
        return 0.0;
    }
    // Known breaks: some boundary passes a, b1, b1 + pi or an alpha boundary.
    std::vector<double> cuts{theta_lo, theta_hi};
    std::vector<double> anchors{a.radians(), b1.radians(), b1.opposite().radians()};
    for (int j = 0; j < 10; ++j) {
        anchors.push_back(geometry::alpha_boundary(j));
    }
    for (const double x : anchors) {
        for (const auto& offsets : {geometry::kBetaAlphaOffsets, geometry::kGammaAlphaOffsets}) {
            for (const int off : offsets) {
                const double t = geometry::Angle(x - geometry::alpha_boundary(off)).radians();
                if (t > theta_lo && t < theta_hi) {
                    cuts.push_back(t);
                }
            }
        }
    }
    // Breaks that depend on the cell midpoint (the arc direction flips when
    // it passes antipodal to Bob) are located by scanning and bisection.
    constexpr int kScan = 720;
    double prev_t = theta_lo;
    PieceKey prev_key = piece_key(a, b1, prev_t, strategy);
    for (int i = 1; i <= kScan; ++i) {
        const double t = i == kScan ? theta_hi : theta_lo + (theta_hi - theta_lo) * i / kScan;
        const PieceKey key = piece_key(a, b1, t, strategy);
        if (key != prev_key) {
            double lo = prev_t;
            double hi = t;
            for (int it = 0; it < 64 && hi - lo > 1e-15; ++it) {
                const double mid = 0.5 * (lo + hi);
                (piece_key(a, b1, mid, strategy) == prev_key ? lo : hi) = mid;
            }
            cuts.push_back(hi);
        }
        prev_t = t;
        prev_key = key;
    }
    std::sort(cuts.begin(), cuts.end());
    std::vector<double> merged;
    for (const double c : cuts) {
        if (merged.empty() || c - merged.back() > 1e-12) {
            merged.push_back(c);
        } else if (c == theta_hi) {
            merged.back() = c;
        }
    }

    const auto f = [&](double theta) {
        return two_bob_equal_given_theta(a, b1, theta, strategy, coin);
    };
    double sum = 0.0;
    // Cut points carry ~1 ulp of error; pulling each piece in by 1e-12 keeps
    // the jump outside it at a cost far below the tolerance.
    constexpr double kInset = 1e-12;
    for (std::size_t i = 0; i + 1 < merged.size(); ++i) {
        sum += integrate(f, merged[i] + kInset, merged[i + 1] - kInset, 1e-10).value;
    }
    return kDensity * sum;
}

double two_bob_equal_full_theta(geometry::Angle a, geometry::Angle b1,
                                const protocol::Strategy& strategy, protocol::CoinMode coin) {
    return two_bob_equal_over(a, b1, 0.0, geometry::kThetaRange, strategy, coin);
}

ThetaWindow anomaly_window(double nu) {
    check_nu(nu);
    return {kPi / 5.0 + nu, 2.0 * kPi / 5.0 + nu};
}

geometry::Angle alice_setting_for_nu(double nu) {
    check_nu(nu);
    return geometry::Angle(geometry::alpha_boundary(2) + nu);
}

VisibilityReport visibility_report(double visibility, double nu) {
    if (!(visibility >= 0.0 && visibility <= 1.0)) {
        throw std::domain_error("visibility must lie in [0, 1], got " + std::to_string(visibility));
    }
    const NuCurvePoint curve = p_opposite_equal_closed(nu);
    const double loss = 1.0 - visibility;
    const double range = geometry::kThetaRange;
    VisibilityReport r;
    r.visibility = visibility;
    r.nu = nu;
    r.p_effective = visibility * visibility * curve.total;
    r.p_peff1 = visibility * curve.p1 - (kNuMax - nu) / range * loss;
    r.p_peff2 = visibility * curve.p2 - nu / range * loss;
    r.v_threshold = visibility_threshold(nu);
    // V <= V_th is exactly the region where the sum is <= 0; deciding on V
    // keeps the threshold itself at 0 despite rounding in the sum.
    r.p_peff_total = visibility <= r.v_threshold ? 0.0 : std::max(0.0, r.p_peff1 + r.p_peff2);
    return r;
}

double visibility_threshold(double nu) {
    const double p = p_opposite_equal_closed(nu).total;
    return (1.0 / 3.0) / (p + 1.0 / 3.0);
}

double visibility_threshold_iterative(double nu) {
    const double p = p_opposite_equal_closed(nu).total;
    const auto g = [p](double v) { return v * p - (1.0 - v) / 3.0; };
    std::uintmax_t iterations = 100;
    const auto root = boost::math::tools::toms748_solve(
        g, 0.0, 1.0, boost::math::tools::eps_tolerance<double>(50), iterations);
    return 0.5 * (root.first + root.second);
}

}  // namespace bct::analysis
