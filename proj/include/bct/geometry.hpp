#pragma once

#include <array>
#include <cstddef>
#include <numbers>
#include <optional>
#include <string_view>

namespace bct::geometry {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Width of one alpha slot (pi/5).
inline constexpr double kAlphaWidth = kPi / 5.0;

/// Shared random offset theta is drawn from [0, kThetaRange).
inline constexpr double kThetaRange = 3.0 * kPi / 5.0;

/// A direction in the measurement plane, held in [0, 2pi).
class Angle {
public:
    constexpr Angle() = default;

    /// Normalizes `radians` modulo 2pi; throws std::domain_error on NaN/inf.
    explicit Angle(double radians);

    constexpr double radians() const { return value_; }

    Angle operator+(double radians) const { return Angle(value_ + radians); }
    Angle operator-(double radians) const { return Angle(value_ - radians); }

    /// The antipodal direction.
    Angle opposite() const { return *this + kPi; }

    friend constexpr bool operator==(Angle, Angle) = default;

private:
    double value_ = 0.0;
};

Angle normalize_angle(double radians);

/// Short-way separation on the circle, in [0, pi].
double arc_distance(Angle x, Angle y);

enum class SlotKind { alpha, beta, gamma };

std::string_view to_string(SlotKind kind);

/// Boundary offsets of the beta system relative to theta: alpha_0, alpha_3, alpha_6.
inline constexpr std::array<int, 3> kBetaAlphaOffsets = {0, 3, 6};
/// Gamma system: alpha_5, alpha_8, alpha_1 (each beta boundary plus pi).
inline constexpr std::array<int, 3> kGammaAlphaOffsets = {5, 8, 1};

/// Position of alpha_j = j*pi/5. Everything that needs alpha_j goes through
/// this so angles placed on a boundary compare equal to it.
double alpha_boundary(int j);

/// A partition of the circle into half-open slots [b_j, b_{j+1 mod n}).
class SlotSystem {
public:
    static constexpr std::size_t kMaxBoundaries = 10;

    static SlotSystem alpha();
    /// theta must be finite; any value is accepted and reduced mod 2pi.
    static SlotSystem beta(double theta);
    static SlotSystem gamma(double theta);

    SlotKind kind() const { return kind_; }
    std::size_t size() const { return size_; }
    Angle boundary(std::size_t j) const { return boundaries_[j]; }

    /// The unique j with x in [b_j, b_{j+1 mod n}).
    int slot_index(Angle x) const;

private:
    SlotSystem(SlotKind kind, std::size_t size) : kind_(kind), size_(size) {}

    SlotKind kind_;
    std::size_t size_;
    std::array<Angle, kMaxBoundaries> boundaries_{};
};

inline int slot_index(Angle x, const SlotSystem& system) { return system.slot_index(x); }

/// min(|j1-j2|, 10-|j1-j2|). Throws std::out_of_range unless both are in 0..9.
int alpha_slot_cyclic_difference(int j1, int j2);
/// |j1-j2|. Same range check as the cyclic variant.
int alpha_slot_absolute_difference(int j1, int j2);

struct BoundaryCrossing {
    Angle boundary;
    int index = 0;            ///< which boundary of the system
    bool multiple = false;    ///< shorter arc held more than one boundary
};

/// The boundary separating x from y along the shorter arc, or nullopt when
/// both lie in the same slot. If several boundaries sit on that arc the one
/// nearest y is returned with `multiple` set.
std::optional<BoundaryCrossing> boundary_between(Angle x, Angle y, const SlotSystem& system);

struct SlotTriple {
    int alpha = 0;
    int beta = 0;
    int gamma = 0;

    friend constexpr bool operator==(const SlotTriple&, const SlotTriple&) = default;
};

/// The 16-cell refinement of the alpha, beta and gamma systems for one theta.
/// Boundaries are sorted ascending from alpha_0 = 0, so cell k is
/// [edge_k, edge_{k+1}) with edge_16 = 2pi; no cell wraps.
class CellPartition {
public:
    static constexpr int kCells = 16;

    /// theta must lie in [0, 3pi/5); throws std::domain_error otherwise.
    explicit CellPartition(double theta);

    double theta() const { return theta_; }
    const SlotSystem& alpha() const { return alpha_; }
    const SlotSystem& beta() const { return beta_; }
    const SlotSystem& gamma() const { return gamma_; }

    int cell_of(Angle x) const;

    /// Lower and upper edge of cell k; upper may be 2pi for the last cell.
    double lower_edge(int cell) const;
    double upper_edge(int cell) const;
    bool empty(int cell) const { return !(lower_edge(cell) < upper_edge(cell)); }

    /// Slots shared by every point of a non-empty cell; nullopt for empty cells
    /// or indices outside 0..15.
    std::optional<SlotTriple> decode(int cell) const;

    /// Midpoint of a non-empty cell.
    Angle representative(int cell) const;

    const SlotSystem& system(SlotKind kind) const;

private:
    double theta_;
    SlotSystem alpha_;
    SlotSystem beta_;
    SlotSystem gamma_;
    std::array<double, kCells> edges_{};
};

struct Cell {
    int index = 0;
    SlotTriple slots;
};

/// Cell of x in the partition for theta, with its decoded slot triple.
Cell cell_index(Angle x, double theta);

}  // namespace bct::geometry
