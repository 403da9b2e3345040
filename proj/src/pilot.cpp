#include "dragonboat/pilot.hpp"

#include <algorithm>
#include <cmath>

namespace dragonboat {

double full_effort_input(Technique t) {
    switch (t) {
        case Technique::jc: return 1.0;
        // Sustained forearm rotation with a handheld controller.
        case Technique::ic: return 127.0;
        // Sustained cranking of the handles against the motor brake.
        case Technique::ec: return 200.0;
    }
    return 0.0;
}

double effort_to_input(Technique t, double effort) {
    return std::clamp(effort, -1.0, 1.0) * full_effort_input(t);
}

Trace straight_trace(Technique t, double effort, const std::string& track) {
    Trace trace;
    trace.meta.technique = t;
    trace.meta.track = track;
    trace.meta.description = "both paddles at constant effort";
    trace.messages.push_back(EventMessage{"calibrate_done", 0.0});
    trace.messages.push_back(EventMessage{"race_requested", 0.0});
    const double v = effort_to_input(t, effort);
    trace.messages.push_back(InputMessage{t, v, v, 0.0});
    return trace;
}

namespace {

struct LateralPlan {
    struct Window {
        double from_x;
        double target_y;
    };
    double lane_y = 0.0;
    std::vector<Window> windows;

    double target(double x) const {
        double y = lane_y;
        for (const Window& w : windows)
            if (x >= w.from_x) y = w.target_y;
        return y;
    }
};

// Line up on the middle of each wall's open water, starting `approach` metres
// before it and holding until the next wall takes over.
LateralPlan plan_for(const SessionConfig& c, double approach) {
    LateralPlan plan;
    const Track& t = c.track;
    plan.lane_y = t.lane_center(c.lane);
    const double lo = t.lane_lo(c.lane), hi = t.lane_hi(c.lane);
    std::vector<Barrier> walls;
    for (const Barrier& b : t.barriers) {
        const double mid = 0.5 * (b.y_lo + b.y_hi);
        if (mid >= lo && mid < hi) walls.push_back(b);
    }
    std::sort(walls.begin(), walls.end(), [](const Barrier& a, const Barrier& b) { return a.x < b.x; });
    for (const Barrier& b : walls) {
        const double below = std::max(b.y_lo - lo, 0.0);
        const double above = std::max(hi - b.y_hi, 0.0);
        const double gap_mid = below >= above ? 0.5 * (lo + std::max(b.y_lo, lo)) : 0.5 * (std::min(b.y_hi, hi) + hi);
        plan.windows.push_back({b.x - approach, gap_mid});
    }
    return plan;
}

double quantize(double v, double q) { return q > 0.0 ? std::round(v / q) * q : v; }

}  // namespace

Trace pilot_trace(const SessionConfig& config, const PilotParams& params) {
    SessionLoop loop(config);
    const Technique tech = config.technique;
    const LateralPlan plan = plan_for(config, params.approach);

    Trace trace;
    trace.meta.technique = tech;
    trace.meta.track = config.track_name;
    trace.meta.description = "closed-loop pilot at effort " + std::to_string(params.effort);

    auto send = [&](ClientMessage m) {
        loop.apply(m);
        trace.messages.push_back(std::move(m));
    };
    send(EventMessage{"calibrate_done", 0.0});
    send(EventMessage{"race_requested", 0.0});

    const auto max_ticks = static_cast<std::uint64_t>(std::ceil(config.max_duration / config.hydro.dt));
    std::optional<std::pair<double, double>> last;
    std::uint64_t last_change = 0;
    while (loop.session().phase != Phase::finished && loop.ticks() < max_ticks) {
        const BoatState& b = loop.boat();
        const double ahead = b.x + params.lookahead;
        const double desired = std::clamp(std::atan2(plan.target(ahead) - b.y, params.lookahead),
                                          -params.max_heading, params.max_heading);
        const double u = params.heading_gain * wrap_radians(desired - b.heading) - params.yaw_damping * b.yaw_rate;
        // Positive u asks for an anticlockwise turn, which needs the right paddle to dominate.
        const double left = quantize(std::clamp(params.effort - std::max(u, 0.0), -1.0, 1.0), params.quantum);
        const double right = quantize(std::clamp(params.effort - std::max(-u, 0.0), -1.0, 1.0), params.quantum);

        const bool due = !last || loop.ticks() - last_change >= static_cast<std::uint64_t>(params.update_every);
        if (due && (!last || last->first != left || last->second != right)) {
            send(InputMessage{tech, effort_to_input(tech, left), effort_to_input(tech, right), loop.time()});
            last = {left, right};
            last_change = loop.ticks();
        }
        loop.tick();
    }
    return trace;
}

std::vector<NamedTrace> bundled_traces() {
    std::vector<NamedTrace> out;
    for (Technique t : {Technique::jc, Technique::ic, Technique::ec}) {
        const std::string tech(to_string(t));
        out.push_back({tech + "-full-throttle", straight_trace(t)});
        SessionConfig c;
        c.technique = t;
        c.track_name = "barrier";
        c.track = Track::barrier_course();
        Trace tr = pilot_trace(c);
        tr.meta.description = "closed-loop pilot at full effort around both walls";
        out.push_back({tech + "-barrier", std::move(tr)});
    }
    return out;
}

}  // namespace dragonboat
