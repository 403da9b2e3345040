#include "dragonboat/race.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace dragonboat {

void Track::validate(double boat_beam) const {
    if (!(length > 0.0 && lane_count > 0 && lane_width > 0.0 && buoy_spacing > 0.0))
        throw std::invalid_argument("track dimensions must be positive");
    if (std::abs((finish_x - start_x) - length) > 1e-9)
        throw std::invalid_argument("finish_x - start_x must equal the track length");
    for (const Barrier& w : barriers) {
        if (!(w.x > start_x && w.x + w.thickness < finish_x))
            throw std::invalid_argument("barriers must lie strictly between the start and finish lines");
        if (!(w.thickness > 0.0 && w.y_lo < w.y_hi))
            throw std::invalid_argument("barrier rectangle is empty");
        // Navigable water is judged inside the lane that holds the wall's centre.
        const int lane = static_cast<int>(std::floor((0.5 * (w.y_lo + w.y_hi) - lane_lo(0)) / lane_width));
        const double lo = lane_lo(lane), hi = lane_hi(lane);
        const double gap = std::max(w.y_lo - lo, 0.0) + std::max(hi - w.y_hi, 0.0);
        if (gap < 2.0 * boat_beam)
            throw std::invalid_argument("barrier leaves less than two beams of navigable water");
    }
}

Track Track::straight() { return Track{}; }

Track Track::barrier_course() {
    Track t;
    constexpr double blocked = 0.6;
    for (int lane = 0; lane < t.lane_count; ++lane) {
        const double lo = t.lane_lo(lane), hi = t.lane_hi(lane);
        t.barriers.push_back({500.0, hi - blocked * t.lane_width, hi, 1.0});
        t.barriers.push_back({750.0, lo, lo + blocked * t.lane_width, 1.0});
    }
    return t;
}

Track Track::preset(std::string_view name) {
    if (name == "straight") return straight();
    if (name == "barrier") return barrier_course();
    throw std::invalid_argument("unknown track preset '" + std::string(name) + "'");
}

std::vector<Buoy> buoys(const Track& t) {
    const auto per_line = static_cast<int>(std::llround(t.length / t.buoy_spacing)) + 1;
    std::vector<Buoy> out;
    out.reserve(static_cast<std::size_t>(per_line * (t.lane_count + 1)));
    for (int line = 0; line <= t.lane_count; ++line)
        for (int j = 0; j < per_line; ++j)
            out.push_back({line, {t.start_x + j * t.buoy_spacing, t.lane_lo(line)}});
    return out;
}

BoatFootprint footprint(const BoatState& b, double boat_length, double beam) {
    const double hx = 0.5 * boat_length * std::cos(b.heading);
    const double hy = 0.5 * boat_length * std::sin(b.heading);
    return {{b.x + hx, b.y + hy}, {b.x - hx, b.y - hy}, beam};
}

bool detect_start(const BoatFootprint& prev, const BoatFootprint& cur, const Track& track) {
    return prev.bow.x < track.start_x && track.start_x <= cur.bow.x;
}

bool detect_finish(const BoatFootprint& prev, const BoatFootprint& cur, const Track& track) {
    return prev.stern.x < track.finish_x && track.finish_x <= cur.stern.x;
}

namespace {

double point_box_distance(Vec2 p, const Barrier& w) {
    const double dx = std::max({w.x - p.x, 0.0, p.x - (w.x + w.thickness)});
    const double dy = std::max({w.y_lo - p.y, 0.0, p.y - w.y_hi});
    return std::hypot(dx, dy);
}

double point_segment_distance(Vec2 p, Vec2 a, Vec2 b) {
    const double ex = b.x - a.x, ey = b.y - a.y;
    const double len2 = ex * ex + ey * ey;
    double s = 0.0;
    if (len2 > 0.0) s = std::clamp(((p.x - a.x) * ex + (p.y - a.y) * ey) / len2, 0.0, 1.0);
    return std::hypot(p.x - (a.x + s * ex), p.y - (a.y + s * ey));
}

// Liang-Barsky clip of the segment against the closed box.
bool segment_hits_box(Vec2 a, Vec2 b, const Barrier& w) {
    double t0 = 0.0, t1 = 1.0;
    const double d[2] = {b.x - a.x, b.y - a.y};
    const double lo[2] = {w.x - a.x, w.y_lo - a.y};
    const double hi[2] = {w.x + w.thickness - a.x, w.y_hi - a.y};
    for (int k = 0; k < 2; ++k) {
        if (d[k] == 0.0) {
            if (lo[k] > 0.0 || hi[k] < 0.0) return false;
            continue;
        }
        double ta = lo[k] / d[k], tb = hi[k] / d[k];
        if (ta > tb) std::swap(ta, tb);
        t0 = std::max(t0, ta);
        t1 = std::min(t1, tb);
        if (t0 > t1) return false;
    }
    return true;
}

}  // namespace

double segment_barrier_distance(Vec2 a, Vec2 b, const Barrier& w) {
    if (segment_hits_box(a, b, w)) return 0.0;
    double d = std::min(point_box_distance(a, w), point_box_distance(b, w));
    const Vec2 corners[4] = {{w.x, w.y_lo}, {w.x + w.thickness, w.y_lo},
                             {w.x, w.y_hi}, {w.x + w.thickness, w.y_hi}};
    for (Vec2 c : corners) d = std::min(d, point_segment_distance(c, a, b));
    return d;
}

CollisionReport collide(const BoatFootprint& fp, const std::vector<Barrier>& barriers) {
    CollisionReport r;
    r.clearance = std::numeric_limits<double>::infinity();
    const double radius = 0.5 * fp.beam;
    for (std::size_t i = 0; i < barriers.size(); ++i) {
        const double clearance = segment_barrier_distance(fp.bow, fp.stern, barriers[i]) - radius;
        if (clearance < r.clearance) {
            r.clearance = clearance;
            r.barrier_index = i;
        }
    }
    r.hit = r.clearance < 0.0;
    return r;
}

BoatState resolve_collision(const BoatState& prev, const BoatState& cur, double boat_length,
                            double beam, const std::vector<Barrier>& barriers, bool* collided) {
    if (collided) *collided = false;
    if (barriers.empty() || !collide(footprint(cur, boat_length, beam), barriers).hit) return cur;
    if (collided) *collided = true;

    const double dheading = wrap_radians(cur.heading - prev.heading);
    auto lerp = [&](double s) {
        BoatState b = cur;
        b.x = prev.x + s * (cur.x - prev.x);
        b.y = prev.y + s * (cur.y - prev.y);
        b.heading = wrap_radians(prev.heading + s * dheading);
        b.distance_travelled = prev.distance_travelled + s * (cur.distance_travelled - prev.distance_travelled);
        return b;
    };

    double ok = 0.0, bad = 1.0;
    if (collide(footprint(prev, boat_length, beam), barriers).hit) {
        bad = 0.0;  // already in contact: hold position
    } else {
        for (int i = 0; i < 48; ++i) {
            const double mid = 0.5 * (ok + bad);
            if (collide(footprint(lerp(mid), boat_length, beam), barriers).hit) bad = mid;
            else ok = mid;
        }
    }
    BoatState out = lerp(ok);
    out.surge_velocity = 0.0;
    out.yaw_rate = 0.0;
    return out;
}

std::string_view to_string(Phase p) {
    switch (p) {
        case Phase::calibration: return "calibration";
        case Phase::training: return "training";
        case Phase::racing: return "racing";
        case Phase::finished: return "finished";
    }
    return "?";
}

std::string_view to_string(RaceEvent e) {
    switch (e) {
        case RaceEvent::calibrate_done: return "calibrate_done";
        case RaceEvent::race_requested: return "race_requested";
        case RaceEvent::reset_position: return "reset_position";
        case RaceEvent::recalibrate: return "recalibrate";
        case RaceEvent::start_crossed: return "start_crossed";
        case RaceEvent::finish_crossed: return "finish_crossed";
    }
    return "?";
}

std::optional<RaceEvent> parse_client_event(std::string_view name) {
    if (name == "calibrate_done") return RaceEvent::calibrate_done;
    if (name == "race_requested") return RaceEvent::race_requested;
    if (name == "reset_position") return RaceEvent::reset_position;
    if (name == "recalibrate") return RaceEvent::recalibrate;
    return std::nullopt;
}

std::optional<RaceSession> advance_phase(const RaceSession& s, RaceEvent event, double t) {
    RaceSession n = s;
    switch (s.phase) {
        case Phase::calibration:
            if (event == RaceEvent::calibrate_done) {
                n.phase = Phase::training;
                return n;
            }
            if (event == RaceEvent::reset_position) return n;
            return std::nullopt;
        case Phase::training:
            if (event == RaceEvent::race_requested) {
                n.phase = Phase::racing;
                n.race_start_time.reset();
                return n;
            }
            if (event == RaceEvent::recalibrate) {
                n.phase = Phase::calibration;
                return n;
            }
            if (event == RaceEvent::reset_position) return n;
            return std::nullopt;
        case Phase::racing:
            if (event == RaceEvent::start_crossed && !s.race_start_time) {
                n.race_start_time = t;
                return n;
            }
            if (event == RaceEvent::finish_crossed && s.race_start_time && t > *s.race_start_time) {
                n.phase = Phase::finished;
                n.completion_time = t - *s.race_start_time;
                return n;
            }
            return std::nullopt;
        case Phase::finished:
            return std::nullopt;
    }
    return std::nullopt;
}

}  // namespace dragonboat
