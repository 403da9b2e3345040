#pragma once

// Course geometry, crossing rules, barrier collisions and the session phase
// machine.
//
// Course frame: x runs from the start line towards the finish line, y points
// to the left of the direction of travel. Lane i is centred on y = i * width,
// so a boat in lane 0 starts on y = 0.

#include <optional>
#include <string_view>
#include <vector>

#include "dragonboat/sim.hpp"
#include "dragonboat/techniques.hpp"

namespace dragonboat {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
};

/// Axis-aligned wall occupying x in [x, x + thickness], y in [y_lo, y_hi].
struct Barrier {
    double x = 0.0;
    double y_lo = 0.0;
    double y_hi = 0.0;
    double thickness = 1.0;
};

struct Track {
    double length = 1000.0;
    int lane_count = 6;
    double lane_width = 13.5;
    double buoy_spacing = 10.0;
    double start_x = 0.0;
    double finish_x = 1000.0;
    std::vector<Barrier> barriers;

    double lane_center(int lane) const { return lane * lane_width; }
    double lane_lo(int lane) const { return lane_center(lane) - 0.5 * lane_width; }
    double lane_hi(int lane) const { return lane_center(lane) + 0.5 * lane_width; }

    /// Throws std::invalid_argument on broken geometry, including a wall that
    /// leaves less than two beams of navigable water in its lane.
    void validate(double boat_beam) const;

    /// The 1 km course with no obstacles.
    static Track straight();
    /// The 1 km course with walls at 500 m (left 60% of each lane) and 750 m
    /// (right 60%), forcing an S-shaped detour.
    static Track barrier_course();
    /// "straight" or "barrier". Throws std::invalid_argument otherwise.
    static Track preset(std::string_view name);
};

struct Buoy {
    int lane_line = 0;  // 0..lane_count, line i sits at y = lane_lo(i)
    Vec2 position;
};

/// Buoys along every lane line, one per buoy_spacing from start to finish.
std::vector<Buoy> buoys(const Track& t);

struct BoatFootprint {
    Vec2 bow;
    Vec2 stern;
    double beam = 1.2;
};

BoatFootprint footprint(const BoatState& b, double boat_length, double beam);

/// Rising-edge crossing of the start line by the bow.
bool detect_start(const BoatFootprint& prev, const BoatFootprint& cur, const Track& track);

/// Rising-edge crossing of the finish line by the stern; landing exactly on
/// the line counts.
bool detect_finish(const BoatFootprint& prev, const BoatFootprint& cur, const Track& track);

/// Euclidean distance between segment a-b and a barrier rectangle (0 when
/// they intersect).
double segment_barrier_distance(Vec2 a, Vec2 b, const Barrier& w);

struct CollisionReport {
    bool hit = false;
    std::size_t barrier_index = 0;
    double clearance = 0.0;  // smallest hull-to-wall distance, negative when penetrating
};

/// The hull is the bow-stern segment inflated by half the beam. Touching a
/// wall exactly is not a collision.
CollisionReport collide(const BoatFootprint& fp, const std::vector<Barrier>& barriers);

/// Inelastic stop: if `cur` penetrates a wall, returns the last pose on the
/// straight path from `prev` that does not, with surge and yaw rates zeroed.
/// Returns `cur` untouched when there is no collision.
BoatState resolve_collision(const BoatState& prev, const BoatState& cur, double boat_length,
                            double beam, const std::vector<Barrier>& barriers, bool* collided = nullptr);

enum class Phase { calibration, training, racing, finished };

std::string_view to_string(Phase p);

enum class RaceEvent {
    calibrate_done,
    race_requested,
    reset_position,
    recalibrate,
    start_crossed,
    finish_crossed,
};

std::string_view to_string(RaceEvent e);
/// Only the client-facing events parse; crossings are detected, not requested.
std::optional<RaceEvent> parse_client_event(std::string_view name);

struct RaceSession {
    Phase phase = Phase::calibration;
    Technique technique = Technique::jc;
    std::optional<double> race_start_time;
    std::optional<double> completion_time;

    bool armed() const { return phase == Phase::racing && !race_start_time; }
    bool operator==(const RaceSession&) const = default;
};

/// Applies `event` at session time `t`. Returns nullopt for an illegal
/// transition; the caller keeps its current session in that case.
std::optional<RaceSession> advance_phase(const RaceSession& s, RaceEvent event, double t);

}  // namespace dragonboat
