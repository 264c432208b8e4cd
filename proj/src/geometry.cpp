#include "bct/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace bct::geometry {

Angle::Angle(double radians) {
    if (!std::isfinite(radians)) {
        throw std::domain_error("angle must be finite, got " + std::to_string(radians));
    }
    double r = std::fmod(radians, kTwoPi);
    if (r < 0.0) {
        r += kTwoPi;
    }
    // fmod of a tiny negative plus 2pi can round up to exactly 2pi.
    if (r >= kTwoPi) {
        r = 0.0;
    }
    value_ = r + 0.0;  // drop negative zero
}

Angle normalize_angle(double radians) { return Angle(radians); }

double arc_distance(Angle x, Angle y) {
    const double d = std::fabs(x.radians() - y.radians());
    return std::min(d, kTwoPi - d);
}

std::string_view to_string(SlotKind kind) {
    switch (kind) {
        case SlotKind::alpha: return "alpha";
        case SlotKind::beta: return "beta";
        case SlotKind::gamma: return "gamma";
    }
    return "?";
}

double alpha_boundary(int j) { return static_cast<double>(j) * kPi / 5.0; }

SlotSystem SlotSystem::alpha() {
    SlotSystem s(SlotKind::alpha, 10);
    for (int j = 0; j < 10; ++j) {
        s.boundaries_[static_cast<std::size_t>(j)] = Angle(alpha_boundary(j));
    }
    return s;
}

SlotSystem SlotSystem::beta(double theta) {
    SlotSystem s(SlotKind::beta, 3);
    for (std::size_t j = 0; j < 3; ++j) {
        s.boundaries_[j] = Angle(alpha_boundary(kBetaAlphaOffsets[j]) + theta);
    }
    return s;
}

SlotSystem SlotSystem::gamma(double theta) {
    SlotSystem s(SlotKind::gamma, 3);
    for (std::size_t j = 0; j < 3; ++j) {
        s.boundaries_[j] = Angle(alpha_boundary(kGammaAlphaOffsets[j]) + theta);
    }
    return s;
}

int SlotSystem::slot_index(Angle x) const {
    const double v = x.radians();
    for (std::size_t j = 0; j < size_; ++j) {
        const double lo = boundaries_[j].radians();
        const double hi = boundaries_[(j + 1) % size_].radians();
        const bool inside = lo < hi ? (v >= lo && v < hi) : (v >= lo || v < hi);
        if (lo != hi && inside) {
            return static_cast<int>(j);
        }
    }
    // Only reachable if every boundary coincides, which no system allows.
    throw std::logic_error("slot system does not cover angle " + std::to_string(v));
}

namespace {

void check_alpha_slot(int j) {
    if (j < 0 || j > 9) {
        throw std::out_of_range("alpha slot index out of range: " + std::to_string(j));
    }
}

}  // namespace

int alpha_slot_cyclic_difference(int j1, int j2) {
    check_alpha_slot(j1);
    check_alpha_slot(j2);
    const int d = std::abs(j1 - j2);
    return std::min(d, 10 - d);
}

int alpha_slot_absolute_difference(int j1, int j2) {
    check_alpha_slot(j1);
    check_alpha_slot(j2);
    return std::abs(j1 - j2);
}

std::optional<BoundaryCrossing> boundary_between(Angle x, Angle y, const SlotSystem& system) {
    const int n = static_cast<int>(system.size());
    const int jx = system.slot_index(x);
    const int jy = system.slot_index(y);
    if (jx == jy) {
        return std::nullopt;
    }
    // Walking counterclockwise from x crosses b_{jx+1}..b_{jy}; clockwise
    // crosses b_{jx}..b_{jy+1}. Counting on indices keeps the crossing set
    // consistent with half-open slot membership.
    const bool counterclockwise = Angle(y.radians() - x.radians()).radians() <= kPi;
    int crossed = 0;
    int nearest_y = 0;
    if (counterclockwise) {
        crossed = ((jy - jx) % n + n) % n;
        nearest_y = jy;
    } else {
        crossed = ((jx - jy) % n + n) % n;
        nearest_y = (jy + 1) % n;
    }
    BoundaryCrossing out;
    out.index = nearest_y;
    out.boundary = system.boundary(static_cast<std::size_t>(nearest_y));
    out.multiple = crossed > 1;
    return out;
}

CellPartition::CellPartition(double theta)
    : theta_(theta),
      alpha_(SlotSystem::alpha()),
      beta_(SlotSystem::beta(std::isfinite(theta) ? theta : 0.0)),
      gamma_(SlotSystem::gamma(std::isfinite(theta) ? theta : 0.0)) {
    if (!(theta >= 0.0 && theta < kThetaRange)) {
        throw std::domain_error("theta must lie in [0, 3pi/5), got " + std::to_string(theta));
    }
    std::size_t k = 0;
    for (std::size_t j = 0; j < alpha_.size(); ++j) {
        edges_[k++] = alpha_.boundary(j).radians();
    }
    for (std::size_t j = 0; j < 3; ++j) {
        edges_[k++] = beta_.boundary(j).radians();
        edges_[k++] = gamma_.boundary(j).radians();
    }
    std::sort(edges_.begin(), edges_.end());
}

int CellPartition::cell_of(Angle x) const {
    // edges_[0] == 0, so upper_bound never returns begin().
    const auto it = std::upper_bound(edges_.begin(), edges_.end(), x.radians());
    return static_cast<int>(it - edges_.begin()) - 1;
}

double CellPartition::lower_edge(int cell) const { return edges_.at(static_cast<std::size_t>(cell)); }

double CellPartition::upper_edge(int cell) const {
    if (cell == kCells - 1) {
        return kTwoPi;
    }
    return edges_.at(static_cast<std::size_t>(cell) + 1);
}

std::optional<SlotTriple> CellPartition::decode(int cell) const {
    if (cell < 0 || cell >= kCells || empty(cell)) {
        return std::nullopt;
    }
    const Angle lo(lower_edge(cell));
    return SlotTriple{alpha_.slot_index(lo), beta_.slot_index(lo), gamma_.slot_index(lo)};
}

Angle CellPartition::representative(int cell) const {
    if (cell < 0 || cell >= kCells || empty(cell)) {
        throw std::out_of_range("no representative for cell " + std::to_string(cell));
    }
    return Angle(0.5 * (lower_edge(cell) + upper_edge(cell)));
}

const SlotSystem& CellPartition::system(SlotKind kind) const {
    switch (kind) {
        case SlotKind::alpha: return alpha_;
        case SlotKind::beta: return beta_;
        case SlotKind::gamma: return gamma_;
    }
    return alpha_;
}

Cell cell_index(Angle x, double theta) {
    const CellPartition cells(theta);
    Cell out;
    out.index = cells.cell_of(x);
    out.slots = SlotTriple{cells.alpha().slot_index(x), cells.beta().slot_index(x),
                           cells.gamma().slot_index(x)};
    return out;
}

}  // namespace bct::geometry
