#pragma once

// The authoritative session loop. One SessionLoop owns the boat, both
// paddles, the phase machine and (for the exertion controller) the host side
// of the device link. Headless runs, replays and the live server all drive
// the same loop, so a recorded input trace reproduces its snapshots exactly.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "dragonboat/physiology.hpp"
#include "dragonboat/protocol.hpp"
#include "dragonboat/race.hpp"
#include "dragonboat/sim.hpp"
#include "dragonboat/techniques.hpp"

namespace dragonboat {

using json = nlohmann::json;

enum class InputSource { socket_client, device_stream, script };

std::string_view to_string(InputSource s);
InputSource parse_input_source(std::string_view s);

struct SessionConfig {
    Technique technique = Technique::jc;
    std::string track_name = "barrier";
    Track track = Track::barrier_course();
    HydroParams hydro;
    double boat_beam = 1.2;
    TechniqueParams technique_params;
    protocol::DeviceParams device;
    std::uint64_t seed = 1;
    InputSource input_source = InputSource::script;
    std::string script;       // script name or path, echoed for reference
    std::string record_path;
    int lane = 0;
    int broadcast_every = 3;  // ticks per snapshot (20 Hz at 60 Hz)
    double max_duration = 900.0;

    std::string subject_id;
    physiology::ParticipantProfile participant;
    std::optional<double> working_bpm;  // synthetic heart-rate plateau; per-technique default otherwise
    std::string hr_csv;                 // recorded heart rate to embed instead of a synthetic trace

    /// Throws std::invalid_argument on inconsistent settings.
    void validate() const;
};

void to_json(json& j, const SessionConfig& c);
void from_json(const json& j, SessionConfig& c);

/// Synthetic heart-rate plateau used when no recording is supplied.
double default_working_bpm(Technique t);

struct InputMessage {
    std::optional<Technique> technique;
    double left = 0.0;
    double right = 0.0;
    double t = 0.0;

    bool operator==(const InputMessage&) const = default;
};

struct EventMessage {
    std::string name;
    double t = 0.0;

    bool operator==(const EventMessage&) const = default;
};

using ClientMessage = std::variant<InputMessage, EventMessage>;

double message_time(const ClientMessage& m);

/// Parses one client JSON message. Throws std::invalid_argument.
ClientMessage parse_client_message(const json& j);
json to_json(const ClientMessage& m);

/// Header of a script file: technique and track the trace was authored for.
struct ScriptMeta {
    std::optional<Technique> technique;
    std::optional<std::string> track;
    std::string description;
};

struct Trace {
    ScriptMeta meta;
    std::vector<ClientMessage> messages;
};

/// Error carrying the 1-based line of a malformed trace.
class TraceError : public std::runtime_error {
public:
    TraceError(std::size_t line, const std::string& what)
        : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

/// Reads a JSON-lines trace. Timestamps must be non-decreasing and sit on
/// the `dt` grid.
Trace read_trace(std::istream& in, double dt);
Trace load_trace(const std::filesystem::path& path, double dt);
void write_trace(std::ostream& out, const Trace& trace);

/// Resolves a bundled script name (e.g. "jc-full-throttle") or a file path.
std::filesystem::path resolve_script(const std::string& name_or_path);
std::filesystem::path bundled_scripts_dir();

struct PaddleView {
    double angle = 0.0;
    double omega = 0.0;
    bool in_water = false;
};

struct StateSnapshot {
    std::uint64_t tick = 0;
    double t = 0.0;
    Phase phase = Phase::calibration;
    bool armed = false;
    BoatState boat;
    PaddleView left;
    PaddleView right;
    bool resistance_left = false;
    bool resistance_right = false;
    double distance_remaining = 0.0;
    std::optional<double> race_time;
};

json to_json(const StateSnapshot& s);

/// 64-bit FNV-1a over the snapshot's canonical JSON text.
std::uint64_t snapshot_hash(const StateSnapshot& s);
std::string hex64(std::uint64_t v);

class SessionLoop {
public:
    explicit SessionLoop(SessionConfig config);

    const SessionConfig& config() const { return config_; }

    /// Applies a client message at the current tick. Returns false if it was
    /// rejected (illegal phase event or technique mismatch).
    bool apply(const ClientMessage& m);

    /// Advances one fixed step. Returns a snapshot on broadcast ticks.
    std::optional<StateSnapshot> tick();

    StateSnapshot snapshot() const;

    /// Bytes arriving from an external device (device_stream sessions).
    void feed_device(std::span<const std::uint8_t> bytes);
    /// Bytes queued for an external device since the last call.
    std::vector<std::uint8_t> take_device_output();

    /// Client disconnect: hold both paddles at zero input.
    void release_inputs();

    std::uint64_t ticks() const { return tick_; }
    double time() const { return static_cast<double>(tick_) * config_.hydro.dt; }
    const RaceSession& session() const { return session_; }
    const BoatState& boat() const { return boat_; }
    const PaddleState& paddle(Side s) const { return paddles_[static_cast<std::size_t>(s)]; }
    bool resistance(Side s) const { return resistance_[static_cast<std::size_t>(s)]; }
    std::size_t collisions() const { return collisions_; }
    const protocol::Diagnostics& device_diagnostics() const { return host_parser_.diagnostics(); }
    /// Phase changes (including the start edge) produced by the last tick or apply().
    std::vector<RaceEvent> drain_events();

private:
    void reset_boat();
    void update_paddles();
    void pump_device();
    void send_resistance();
    bool handle_event(RaceEvent e);

    SessionConfig config_;
    WaterZone zone_;
    RaceSession session_;
    BoatState boat_;
    std::array<PaddleState, 2> paddles_;
    std::array<double, 2> input_{0.0, 0.0};
    std::array<bool, 2> resistance_{false, false};
    std::array<bool, 2> resistance_sent_{false, false};
    bool resistance_known_ = false;
    std::uint64_t tick_ = 0;
    std::size_t collisions_ = 0;
    std::vector<RaceEvent> events_;

    // Exertion-controller link. The host side always speaks the wire
    // protocol; in script/client sessions the far end is a SimulatedDevice.
    std::optional<protocol::SimulatedDevice> device_;
    std::uint64_t device_ticks_ = 0;
    protocol::StreamParser host_parser_;
    protocol::SequenceCounter host_seq_;
    std::vector<std::uint8_t> device_out_;
    std::array<std::optional<EncoderSample>, 2> latest_encoder_;
};

struct SessionResult {
    RaceSession session;
    std::uint64_t ticks = 0;
    std::size_t collisions = 0;
    BoatState final_boat;
    std::vector<StateSnapshot> snapshots;
    std::vector<std::uint64_t> hashes;
    std::vector<physiology::HeartSample> heart_rate;
    std::optional<physiology::SessionPhysiology> physiology;
};

/// Feeds `trace` to a fresh loop at its timestamps until the race finishes,
/// the trace is spent with no race running, or max_duration elapses.
/// With `tick_limit` the run instead lasts exactly that many ticks unless the
/// race finishes first.
SessionResult simulate(const SessionConfig& config, const std::vector<ClientMessage>& trace,
                       std::optional<std::uint64_t> tick_limit = std::nullopt);

/// Fills heart rate and physiology from the config's HR file or, failing
/// that, a synthetic series seeded by the session seed.
void add_physiology(const SessionConfig& config, SessionResult& r);

/// simulate() plus physiology; writes the record when `record` is non-null.
SessionResult run_headless(const SessionConfig& config, const std::vector<ClientMessage>& trace,
                           std::ostream* record = nullptr);

/// Streams a session record as JSON lines: config (with trace), snapshots,
/// result. Live sessions leave the config trace empty and interleave the
/// messages instead.
class RecordWriter {
public:
    explicit RecordWriter(std::ostream& out) : out_(out) {}
    void write_config(const SessionConfig& c, const std::vector<ClientMessage>& trace);
    void write_snapshot(const StateSnapshot& s);
    /// A client message applied during a live session, interleaved with snapshots.
    void write_message(const ClientMessage& m);
    void write_result(const SessionResult& r);
    void write_line(const json& j);

private:
    std::ostream& out_;
};

struct SessionRecord {
    SessionConfig config;
    std::vector<ClientMessage> trace;
    std::vector<json> snapshots;
    json result;  // null when the session never closed
};

SessionRecord read_record(std::istream& in);

struct ReplayReport {
    bool ok = false;
    std::size_t snapshots_checked = 0;
    std::optional<std::uint64_t> first_divergent_tick;
    std::string message;
};

/// Re-simulates a record's input trace and compares every snapshot and the
/// stored hashes.
ReplayReport replay(const SessionRecord& record);

}  // namespace dragonboat
