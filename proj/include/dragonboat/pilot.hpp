#pragma once

// Scripted paddler used to author the bundled input traces and to generate
// synthetic cohorts. The pilot reads the loop state every tick, steers with
// differential paddle effort around the walls in its lane, and records the
// inputs it sends as a replayable trace.

#include "dragonboat/session.hpp"

namespace dragonboat {

struct PilotParams {
    double effort = 1.0;        // fraction of the technique's full-effort rate
    double lookahead = 30.0;    // m, for the lateral path
    double approach = 90.0;     // m before a wall where the pilot lines up on its gap
    double max_heading = 0.3;   // rad
    double heading_gain = 3.0;  // effort per rad of heading error
    double yaw_damping = 3.0;   // effort per rad/s of yaw rate
    double quantum = 0.05;      // effort resolution of emitted inputs
    int update_every = 6;       // ticks between input changes (10 Hz)
};

/// Input magnitude for full effort, in the technique's own units: stick
/// deflection for jc, controller pitch rate (deg/s) for ic, handle rate
/// (deg/s) for ec.
double full_effort_input(Technique t);

/// Converts a normalised effort in [-1, 1] to technique input units.
double effort_to_input(Technique t, double effort);

/// Both paddles at the same constant effort from the start of the race.
Trace straight_trace(Technique t, double effort = 1.0, const std::string& track = "straight");

/// Runs a closed-loop pilot through a full race on `config` and returns the
/// inputs it issued. Replaying the trace on the same config reproduces the run.
Trace pilot_trace(const SessionConfig& config, const PilotParams& params = {});

struct NamedTrace {
    std::string name;
    Trace trace;
};

/// The shipped scripts: <tech>-full-throttle on the straight course and
/// <tech>-barrier on the barrier course, for jc, ic and ec, all at full effort
/// with default parameters.
std::vector<NamedTrace> bundled_traces();

}  // namespace dragonboat
