#pragma once

// Paddle and boat dynamics. Everything here is a pure function of its
// arguments so that identical input sequences give bitwise-identical states.

#include <array>
#include <cmath>
#include <numbers>
#include <vector>

namespace dragonboat {

enum class Side { left = 0, right = 1 };

inline constexpr const char* to_string(Side s) { return s == Side::left ? "left" : "right"; }

/// Wraps an angle in degrees into [0, 360).
double wrap_degrees(double deg);

/// Wraps an angle in radians into (-pi, pi].
double wrap_radians(double rad);

/// Half-open degree interval [lo, hi).
struct Arc {
    double lo = 0.0;
    double hi = 0.0;
};

/// The angular set where a virtual blade is submerged. Outside it the blade
/// hovers and produces neither thrust nor resistance.
class WaterZone {
public:
    /// 290..360 and 0..70 degrees.
    WaterZone();
    /// Throws std::invalid_argument if arcs overlap, are empty, or leave [0, 360).
    explicit WaterZone(std::vector<Arc> arcs);

    bool contains(double angle_deg) const;
    const std::vector<Arc>& arcs() const { return arcs_; }

private:
    std::vector<Arc> arcs_;
};

struct PaddleState {
    Side side = Side::left;
    double angle_deg = 0.0;        // [0, 360)
    double omega_deg_s = 0.0;      // positive = anticlockwise = forward stroke
    bool in_water = false;         // cached by refresh()

    /// Wraps angle and recomputes in_water against `zone`.
    void refresh(const WaterZone& zone);
};

struct BoatState {
    double x = 0.0;                // along course (m)
    double y = 0.0;                // lateral, +y is to the left of +x (m)
    double heading = 0.0;          // rad, 0 = +x, anticlockwise positive
    double surge_velocity = 0.0;   // m/s along heading
    double yaw_rate = 0.0;         // rad/s
    double distance_travelled = 0.0;

    bool operator==(const BoatState&) const = default;
};

struct HydroParams {
    double mass = 250.0;              // kg
    double yaw_inertia = 3255.0;      // kg m^2
    double thrust_coeff = 1.95;       // N per deg/s
    double surge_drag_coeff = 20.0;   // N per (m/s)^2
    double yaw_drag_coeff = 1400.0;   // N m per rad/s
    double half_beam = 0.6;           // m, paddle lever arm
    double boat_length = 12.5;        // m
    double dt = 1.0 / 60.0;           // s

    /// Throws std::invalid_argument unless every field is finite and > 0.
    void validate() const;
};

/// True iff `angle_deg` lies in one of the zone's arcs. Throws
/// std::domain_error for angles outside [0, 360).
bool in_water(double angle_deg, const WaterZone& zone);

/// Signed forward thrust in N. Zero whenever the blade is out of the water.
double paddle_thrust(const PaddleState& p, const HydroParams& h, const WaterZone& zone);

/// One semi-implicit Euler step. Velocities are updated from the forces
/// first, then the pose is advanced with the new velocities.
BoatState step(const BoatState& b, double left_force, double right_force, const HydroParams& h);

BoatState step(const BoatState& b, const PaddleState& left, const PaddleState& right,
               const HydroParams& h, const WaterZone& zone);

/// Reflection across the course centre line.
BoatState mirror(const BoatState& b);

}  // namespace dragonboat
