#include "dragonboat/sim.hpp"

#include <algorithm>
#include <stdexcept>

namespace dragonboat {

double wrap_degrees(double deg) {
    double a = std::fmod(deg, 360.0);
    if (a < 0.0) a += 360.0;
    // fmod of a tiny negative value rounds up to exactly 360 after the add.
    if (a >= 360.0) a = 0.0;
    return a;
}

double wrap_radians(double rad) {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    double a = std::fmod(rad, two_pi);
    if (a > std::numbers::pi) a -= two_pi;
    else if (a <= -std::numbers::pi) a += two_pi;
    return a;
}

WaterZone::WaterZone() : arcs_{{0.0, 70.0}, {290.0, 360.0}} {}

WaterZone::WaterZone(std::vector<Arc> arcs) : arcs_(std::move(arcs)) {
    std::sort(arcs_.begin(), arcs_.end(), [](const Arc& a, const Arc& b) { return a.lo < b.lo; });
    for (std::size_t i = 0; i < arcs_.size(); ++i) {
        const Arc& a = arcs_[i];
        if (!(a.lo >= 0.0 && a.hi <= 360.0 && a.lo < a.hi))
            throw std::invalid_argument("water arc must be a non-empty interval within [0, 360)");
        if (i > 0 && arcs_[i - 1].hi > a.lo)
            throw std::invalid_argument("water arcs overlap");
    }
}

bool WaterZone::contains(double angle_deg) const {
    for (const Arc& a : arcs_)
        if (angle_deg >= a.lo && angle_deg < a.hi) return true;
    return false;
}

void PaddleState::refresh(const WaterZone& zone) {
    angle_deg = wrap_degrees(angle_deg);
    in_water = zone.contains(angle_deg);
}

void HydroParams::validate() const {
    const double fields[] = {mass, yaw_inertia, thrust_coeff, surge_drag_coeff,
                             yaw_drag_coeff, half_beam, boat_length, dt};
    for (double f : fields)
        if (!(std::isfinite(f) && f > 0.0))
            throw std::invalid_argument("hydro parameters must be finite and strictly positive");
}

bool in_water(double angle_deg, const WaterZone& zone) {
    if (!(angle_deg >= 0.0 && angle_deg < 360.0))
        throw std::domain_error("paddle angle must be wrapped into [0, 360)");
    return zone.contains(angle_deg);
}

double paddle_thrust(const PaddleState& p, const HydroParams& h, const WaterZone& zone) {
    if (!in_water(p.angle_deg, zone)) return 0.0;
    return h.thrust_coeff * p.omega_deg_s;
}

BoatState step(const BoatState& b, double left_force, double right_force, const HydroParams& h) {
    const double v = b.surge_velocity;
    const double surge_accel =
        (left_force + right_force) / h.mass - (h.surge_drag_coeff / h.mass) * v * std::abs(v);
    // Dominant left paddle pushes the boat's nose to the right (negative yaw).
    const double yaw_accel =
        ((right_force - left_force) * h.half_beam - h.yaw_drag_coeff * b.yaw_rate) / h.yaw_inertia;

    BoatState n = b;
    n.surge_velocity = v + surge_accel * h.dt;
    n.yaw_rate = b.yaw_rate + yaw_accel * h.dt;
    n.heading = wrap_radians(b.heading + n.yaw_rate * h.dt);
    const double ds = n.surge_velocity * h.dt;
    n.x = b.x + ds * std::cos(n.heading);
    n.y = b.y + ds * std::sin(n.heading);
    n.distance_travelled = b.distance_travelled + std::abs(ds);
    return n;
}

BoatState step(const BoatState& b, const PaddleState& left, const PaddleState& right,
               const HydroParams& h, const WaterZone& zone) {
    return step(b, paddle_thrust(left, h, zone), paddle_thrust(right, h, zone), h);
}

BoatState mirror(const BoatState& b) {
    BoatState m = b;
    m.y = -b.y;
    m.heading = -b.heading;
    m.yaw_rate = -b.yaw_rate;
    return m;
}

}  // namespace dragonboat
