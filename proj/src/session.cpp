#include "dragonboat/session.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "dragonboat/log.hpp"

#ifndef DRAGONBOAT_SCRIPTS_DIR
#define DRAGONBOAT_SCRIPTS_DIR "scripts"
#endif

namespace dragonboat {

std::string_view to_string(InputSource s) {
    switch (s) {
        case InputSource::socket_client: return "socket_client";
        case InputSource::device_stream: return "device_stream";
        case InputSource::script: return "script";
    }
    return "?";
}

InputSource parse_input_source(std::string_view s) {
    if (s == "socket_client") return InputSource::socket_client;
    if (s == "device_stream") return InputSource::device_stream;
    if (s == "script") return InputSource::script;
    throw std::invalid_argument("unknown input source '" + std::string(s) + "'");
}

double default_working_bpm(Technique t) {
    // Cohort means observed for each technique.
    switch (t) {
        case Technique::jc: return 81.63;
        case Technique::ic: return 110.78;
        case Technique::ec: return 106.51;
    }
    return 90.0;
}

void SessionConfig::validate() const {
    hydro.validate();
    track.validate(boat_beam);
    if (!(boat_beam > 0.0)) throw std::invalid_argument("boat beam must be positive");
    if (lane < 0 || lane >= track.lane_count) throw std::invalid_argument("lane index outside the track");
    if (broadcast_every < 1) throw std::invalid_argument("broadcast_every must be at least 1");
    if (!(max_duration > 0.0)) throw std::invalid_argument("max_duration must be positive");
    if (!(participant.age > 0.0)) throw std::invalid_argument("participant age must be positive");
    if (participant.weight_kg && !(*participant.weight_kg > 0.0))
        throw std::invalid_argument("participant weight must be positive");
    if (input_source == InputSource::device_stream && technique != Technique::ec)
        throw std::invalid_argument("a device stream can only drive the exertion controller technique");
    const double loop_hz = 1.0 / hydro.dt;
    if (std::abs(loop_hz - std::round(loop_hz)) > 1e-9 ||
        std::abs(device.report_rate_hz - std::round(device.report_rate_hz)) > 1e-9)
        throw std::invalid_argument("loop and device rates must be whole hertz");
}

namespace {

json track_to_json(const std::string& name, const Track& t) {
    json barriers = json::array();
    for (const Barrier& b : t.barriers)
        barriers.push_back({{"x", b.x}, {"y_lo", b.y_lo}, {"y_hi", b.y_hi}, {"thickness", b.thickness}});
    return {{"name", name},
            {"length", t.length},
            {"lane_count", t.lane_count},
            {"lane_width", t.lane_width},
            {"buoy_spacing", t.buoy_spacing},
            {"start_x", t.start_x},
            {"finish_x", t.finish_x},
            {"barriers", barriers}};
}

Track track_from_json(const json& j, std::string& name) {
    if (j.is_string()) {
        name = j.get<std::string>();
        return Track::preset(name);
    }
    name = j.value("name", std::string("custom"));
    Track t = (name == "straight" || name == "barrier") ? Track::preset(name) : Track{};
    t.length = j.value("length", t.length);
    t.lane_count = j.value("lane_count", t.lane_count);
    t.lane_width = j.value("lane_width", t.lane_width);
    t.buoy_spacing = j.value("buoy_spacing", t.buoy_spacing);
    t.start_x = j.value("start_x", t.start_x);
    t.finish_x = j.value("finish_x", t.finish_x);
    if (j.contains("barriers")) {
        t.barriers.clear();
        for (const auto& b : j.at("barriers"))
            t.barriers.push_back({b.at("x").get<double>(), b.at("y_lo").get<double>(), b.at("y_hi").get<double>(),
                                  b.value("thickness", 1.0)});
    }
    return t;
}

}  // namespace

void to_json(json& j, const SessionConfig& c) {
    const HydroParams& h = c.hydro;
    j = json{
        {"type", "config"},
        {"technique", to_string(c.technique)},
        {"track", track_to_json(c.track_name, c.track)},
        {"hydro",
         {{"mass", h.mass},
          {"yaw_inertia", h.yaw_inertia},
          {"thrust_coeff", h.thrust_coeff},
          {"surge_drag_coeff", h.surge_drag_coeff},
          {"yaw_drag_coeff", h.yaw_drag_coeff},
          {"half_beam", h.half_beam},
          {"boat_length", h.boat_length},
          {"dt", h.dt}}},
        {"boat_beam", c.boat_beam},
        {"technique_params",
         {{"joystick_omega_max", c.technique_params.joystick_omega_max},
          {"joystick_deadzone", c.technique_params.joystick_deadzone},
          {"rotation_gain", c.technique_params.rotation_gain},
          {"rotation_cap", c.technique_params.rotation_cap}}},
        {"device", {{"report_rate_hz", c.device.report_rate_hz}, {"friction_gain", c.device.friction_gain}}},
        {"seed", c.seed},
        {"input_source", to_string(c.input_source)},
        {"script", c.script},
        {"record_path", c.record_path},
        {"lane", c.lane},
        {"broadcast_every", c.broadcast_every},
        {"max_duration", c.max_duration},
        {"participant",
         {{"id", c.subject_id},
          {"age", c.participant.age},
          {"weight", c.participant.weight_kg ? json(*c.participant.weight_kg) : json(nullptr)},
          {"sex", physiology::to_string(c.participant.sex)}}},
        {"working_bpm", c.working_bpm ? json(*c.working_bpm) : json(nullptr)},
        {"hr_csv", c.hr_csv},
    };
}

void from_json(const json& j, SessionConfig& c) {
    if (j.contains("technique")) c.technique = parse_technique(j.at("technique").get<std::string>());
    if (j.contains("track")) c.track = track_from_json(j.at("track"), c.track_name);
    if (j.contains("hydro")) {
        const json& h = j.at("hydro");
        HydroParams& p = c.hydro;
        p.mass = h.value("mass", p.mass);
        p.yaw_inertia = h.value("yaw_inertia", p.yaw_inertia);
        p.thrust_coeff = h.value("thrust_coeff", p.thrust_coeff);
        p.surge_drag_coeff = h.value("surge_drag_coeff", p.surge_drag_coeff);
        p.yaw_drag_coeff = h.value("yaw_drag_coeff", p.yaw_drag_coeff);
        p.half_beam = h.value("half_beam", p.half_beam);
        p.boat_length = h.value("boat_length", p.boat_length);
        p.dt = h.value("dt", p.dt);
    }
    c.boat_beam = j.value("boat_beam", c.boat_beam);
    if (j.contains("technique_params")) {
        const json& t = j.at("technique_params");
        TechniqueParams& p = c.technique_params;
        p.joystick_omega_max = t.value("joystick_omega_max", p.joystick_omega_max);
        p.joystick_deadzone = t.value("joystick_deadzone", p.joystick_deadzone);
        p.rotation_gain = t.value("rotation_gain", p.rotation_gain);
        p.rotation_cap = t.value("rotation_cap", p.rotation_cap);
    }
    if (j.contains("device")) {
        const json& d = j.at("device");
        c.device.report_rate_hz = d.value("report_rate_hz", c.device.report_rate_hz);
        c.device.friction_gain = d.value("friction_gain", c.device.friction_gain);
    }
    c.seed = j.value("seed", c.seed);
    if (j.contains("input_source")) c.input_source = parse_input_source(j.at("input_source").get<std::string>());
    c.script = j.value("script", c.script);
    c.record_path = j.value("record_path", c.record_path);
    c.lane = j.value("lane", c.lane);
    c.broadcast_every = j.value("broadcast_every", c.broadcast_every);
    c.max_duration = j.value("max_duration", c.max_duration);
    if (j.contains("participant")) {
        const json& p = j.at("participant");
        c.subject_id = p.value("id", c.subject_id);
        c.participant.age = p.value("age", c.participant.age);
        if (p.contains("weight") && !p.at("weight").is_null()) c.participant.weight_kg = p.at("weight").get<double>();
        if (p.contains("sex")) c.participant.sex = physiology::parse_sex(p.at("sex").get<std::string>());
    }
    if (j.contains("working_bpm") && !j.at("working_bpm").is_null()) c.working_bpm = j.at("working_bpm").get<double>();
    c.hr_csv = j.value("hr_csv", c.hr_csv);
}

double message_time(const ClientMessage& m) {
    return std::visit([](const auto& v) { return v.t; }, m);
}

ClientMessage parse_client_message(const json& j) {
    if (!j.is_object() || !j.contains("type") || !j.at("type").is_string())
        throw std::invalid_argument("message must be an object with a string 'type'");
    const auto type = j.at("type").get<std::string>();
    auto number = [&](const char* key, double fallback) {
        if (!j.contains(key)) return fallback;
        const json& v = j.at(key);
        if (!v.is_number()) throw std::invalid_argument(std::string("'") + key + "' must be a number");
        const double d = v.get<double>();
        if (!std::isfinite(d)) throw std::invalid_argument(std::string("'") + key + "' must be finite");
        return d;
    };
    if (type == "input") {
        InputMessage m;
        if (j.contains("technique")) m.technique = parse_technique(j.at("technique").get<std::string>());
        m.left = number("left", 0.0);
        m.right = number("right", 0.0);
        m.t = number("t", 0.0);
        return m;
    }
    if (type == "event") {
        EventMessage m;
        if (!j.contains("name") || !j.at("name").is_string()) throw std::invalid_argument("event needs a string 'name'");
        m.name = j.at("name").get<std::string>();
        if (!parse_client_event(m.name)) throw std::invalid_argument("unknown event '" + m.name + "'");
        m.t = number("t", 0.0);
        return m;
    }
    throw std::invalid_argument("unknown message type '" + type + "'");
}

json to_json(const ClientMessage& m) {
    if (const auto* in = std::get_if<InputMessage>(&m)) {
        json j = {{"type", "input"}, {"left", in->left}, {"right", in->right}, {"t", in->t}};
        if (in->technique) j["technique"] = to_string(*in->technique);
        return j;
    }
    const auto& ev = std::get<EventMessage>(m);
    return {{"type", "event"}, {"name", ev.name}, {"t", ev.t}};
}

Trace read_trace(std::istream& in, double dt) {
    Trace trace;
    std::string line;
    std::size_t lineno = 0;
    double last_t = -std::numeric_limits<double>::infinity();
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos || line[0] == '#') continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::parse_error& e) {
            throw TraceError(lineno, std::string("invalid JSON: ") + e.what());
        }
        try {
            if (j.value("type", std::string()) == "meta") {
                if (j.contains("technique")) trace.meta.technique = parse_technique(j.at("technique").get<std::string>());
                if (j.contains("track")) trace.meta.track = j.at("track").get<std::string>();
                trace.meta.description = j.value("description", std::string());
                continue;
            }
            ClientMessage m = parse_client_message(j);
            const double t = message_time(m);
            if (t < 0.0) throw std::invalid_argument("negative timestamp");
            if (t < last_t) throw std::invalid_argument("timestamps must be non-decreasing");
            const double ticks = t / dt;
            if (std::abs(ticks - std::round(ticks)) > 1e-6)
                throw std::invalid_argument("timestamp " + std::to_string(t) + " is not on the simulation grid");
            last_t = t;
            trace.messages.push_back(std::move(m));
        } catch (const TraceError&) {
            throw;
        } catch (const std::exception& e) {
            throw TraceError(lineno, e.what());
        }
    }
    return trace;
}

Trace load_trace(const std::filesystem::path& path, double dt) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open trace " + path.string());
    return read_trace(in, dt);
}

void write_trace(std::ostream& out, const Trace& trace) {
    json meta = {{"type", "meta"}};
    if (trace.meta.technique) meta["technique"] = to_string(*trace.meta.technique);
    if (trace.meta.track) meta["track"] = *trace.meta.track;
    if (!trace.meta.description.empty()) meta["description"] = trace.meta.description;
    out << meta.dump() << '\n';
    for (const auto& m : trace.messages) out << to_json(m).dump() << '\n';
}

std::filesystem::path bundled_scripts_dir() {
    if (const char* env = std::getenv("DRAGONBOAT_SCRIPTS_DIR")) return env;
    return DRAGONBOAT_SCRIPTS_DIR;
}

std::filesystem::path resolve_script(const std::string& name_or_path) {
    const std::filesystem::path direct(name_or_path);
    if (std::filesystem::is_regular_file(direct)) return direct;
    const auto bundled = bundled_scripts_dir() / (name_or_path + ".jsonl");
    if (std::filesystem::is_regular_file(bundled)) return bundled;
    throw std::runtime_error("no script file or bundled script named '" + name_or_path + "'");
}

json to_json(const StateSnapshot& s) {
    auto paddle = [](const PaddleView& p) {
        return json{{"angle", p.angle}, {"omega", p.omega}, {"in_water", p.in_water}};
    };
    return json{
        {"type", "state"},
        {"tick", s.tick},
        {"t", s.t},
        {"phase", to_string(s.phase)},
        {"armed", s.armed},
        {"boat",
         {{"x", s.boat.x},
          {"y", s.boat.y},
          {"heading", s.boat.heading},
          {"surge_velocity", s.boat.surge_velocity},
          {"yaw_rate", s.boat.yaw_rate},
          {"distance_travelled", s.boat.distance_travelled}}},
        {"paddles", {{"left", paddle(s.left)}, {"right", paddle(s.right)}}},
        {"resistance", {{"left", s.resistance_left}, {"right", s.resistance_right}}},
        {"distance_remaining", s.distance_remaining},
        {"race_time", s.race_time ? json(*s.race_time) : json(nullptr)},
    };
}

namespace {

std::uint64_t fnv1a(std::string_view text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace

std::uint64_t snapshot_hash(const StateSnapshot& s) { return fnv1a(to_json(s).dump()); }

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

SessionLoop::SessionLoop(SessionConfig config) : config_(std::move(config)) {
    config_.validate();
    session_.technique = config_.technique;
    paddles_[0].side = Side::left;
    paddles_[1].side = Side::right;
    for (auto& p : paddles_) p.refresh(zone_);
    reset_boat();
    if (config_.technique == Technique::ec && config_.input_source != InputSource::device_stream)
        device_.emplace(protocol::HandleScript{}, config_.device);
}

void SessionLoop::reset_boat() {
    boat_ = BoatState{};
    // Bow one metre behind the start line, centred in the lane.
    boat_.x = config_.track.start_x - 0.5 * config_.hydro.boat_length - 1.0;
    boat_.y = config_.track.lane_center(config_.lane);
}

bool SessionLoop::handle_event(RaceEvent e) {
    const auto next = advance_phase(session_, e, time());
    if (!next) return false;
    if (e == RaceEvent::race_requested) reset_boat();
    session_ = *next;
    events_.push_back(e);
    return true;
}

bool SessionLoop::apply(const ClientMessage& m) {
    if (const auto* in = std::get_if<InputMessage>(&m)) {
        if (in->technique && *in->technique != config_.technique) return false;
        input_ = {in->left, in->right};
        if (device_) device_->script().append(time(), in->left, in->right);
        return true;
    }
    const auto& ev = std::get<EventMessage>(m);
    const auto e = parse_client_event(ev.name);
    return e && handle_event(*e);
}

void SessionLoop::release_inputs() { apply(InputMessage{std::nullopt, 0.0, 0.0, time()}); }

std::vector<RaceEvent> SessionLoop::drain_events() { return std::exchange(events_, {}); }

void SessionLoop::feed_device(std::span<const std::uint8_t> bytes) {
    const std::size_t crc_before = host_parser_.diagnostics().crc_mismatches;
    const auto frames = host_parser_.feed(bytes);
    if (host_parser_.diagnostics().crc_mismatches != crc_before)
        log::warn("device stream: {} CRC mismatches so far", host_parser_.diagnostics().crc_mismatches);
    for (const auto& f : frames) {
        const auto s = protocol::as_encoder_report(f);
        if (!s) continue;
        if (s->angle_centideg > 35999) {
            log::warn("device reported out-of-range angle {}", s->angle_centideg);
            continue;
        }
        latest_encoder_[static_cast<std::size_t>(s->side)] = *s;
    }
}

std::vector<std::uint8_t> SessionLoop::take_device_output() { return std::exchange(device_out_, {}); }

void SessionLoop::pump_device() {
    if (!device_) return;
    const auto loop_hz = static_cast<std::uint64_t>(std::llround(1.0 / config_.hydro.dt));
    const auto dev_hz = static_cast<std::uint64_t>(std::llround(config_.device.report_rate_hz));
    while ((device_ticks_ + 1) * loop_hz <= (tick_ + 1) * dev_hz) {
        const auto bytes = device_->tick();
        ++device_ticks_;
        feed_device(bytes);
    }
}

void SessionLoop::update_paddles() {
    const bool active = session_.phase == Phase::training || session_.phase == Phase::racing;
    const TechniqueParams& tp = config_.technique_params;
    for (std::size_t s = 0; s < 2; ++s) {
        PaddleState& p = paddles_[s];
        switch (config_.technique) {
            case Technique::jc:
                p.omega_deg_s = active ? joystick_to_omega({input_[s]}, tp.joystick_omega_max, tp.joystick_deadzone) : 0.0;
                p.angle_deg += p.omega_deg_s * config_.hydro.dt;
                break;
            case Technique::ic:
                p.omega_deg_s = active ? rotation_to_omega({input_[s], time()}, tp.rotation_gain, tp.rotation_cap) : 0.0;
                p.angle_deg += p.omega_deg_s * config_.hydro.dt;
                break;
            case Technique::ec:
                if (const auto& e = latest_encoder_[s]) {
                    const auto mapped = encoder_to_paddle(*e);
                    p.angle_deg = mapped->angle_deg;
                    p.omega_deg_s = mapped->omega_deg_s;
                }
                break;
        }
        p.refresh(zone_);
    }
}

void SessionLoop::send_resistance() {
    for (std::size_t s = 0; s < 2; ++s)
        resistance_[s] = resistance_for(paddles_[s], zone_).level == ResistanceCommand::on;
    if (config_.technique != Technique::ec) return;

    std::vector<std::uint8_t> out;
    for (std::size_t s = 0; s < 2; ++s) {
        if (resistance_known_ && resistance_sent_[s] == resistance_[s]) continue;
        const ResistanceCommand cmd{static_cast<Side>(s), resistance_[s] ? ResistanceCommand::on : ResistanceCommand::off};
        const auto bytes = protocol::encode_frame(
            protocol::make_resistance_cmd(host_seq_.next(protocol::FrameType::resistance_cmd), cmd));
        out.insert(out.end(), bytes.begin(), bytes.end());
        resistance_sent_[s] = resistance_[s];
    }
    resistance_known_ = true;
    if (!device_ && tick_ % 60 == 0) {
        const auto hb = protocol::encode_frame(protocol::make_heartbeat(host_seq_.next(protocol::FrameType::heartbeat)));
        out.insert(out.end(), hb.begin(), hb.end());
    }
    if (out.empty()) return;
    if (device_) device_->receive(out);
    else device_out_.insert(device_out_.end(), out.begin(), out.end());
}

std::optional<StateSnapshot> SessionLoop::tick() {
    pump_device();
    update_paddles();

    const BoatState prev = boat_;
    const bool moving = session_.phase == Phase::training || session_.phase == Phase::racing;
    if (moving) {
        const BoatState next = step(boat_, paddles_[0], paddles_[1], config_.hydro, zone_);
        bool hit = false;
        boat_ = resolve_collision(prev, next, config_.hydro.boat_length, config_.boat_beam, config_.track.barriers, &hit);
        if (hit) ++collisions_;
    }
    ++tick_;

    if (session_.phase == Phase::racing) {
        const auto fp_prev = footprint(prev, config_.hydro.boat_length, config_.boat_beam);
        const auto fp_cur = footprint(boat_, config_.hydro.boat_length, config_.boat_beam);
        if (session_.armed()) {
            if (detect_start(fp_prev, fp_cur, config_.track)) handle_event(RaceEvent::start_crossed);
        } else if (detect_finish(fp_prev, fp_cur, config_.track)) {
            handle_event(RaceEvent::finish_crossed);
        }
    }

    send_resistance();

    if (tick_ % static_cast<std::uint64_t>(config_.broadcast_every) == 0) return snapshot();
    return std::nullopt;
}

StateSnapshot SessionLoop::snapshot() const {
    StateSnapshot s;
    s.tick = tick_;
    s.t = time();
    s.phase = session_.phase;
    s.armed = session_.armed();
    s.boat = boat_;
    s.left = {paddles_[0].angle_deg, paddles_[0].omega_deg_s, paddles_[0].in_water};
    s.right = {paddles_[1].angle_deg, paddles_[1].omega_deg_s, paddles_[1].in_water};
    s.resistance_left = resistance_[0];
    s.resistance_right = resistance_[1];
    const double bow_x = footprint(boat_, config_.hydro.boat_length, config_.boat_beam).bow.x;
    s.distance_remaining = std::clamp(config_.track.finish_x - bow_x, 0.0, config_.track.length);
    if (session_.completion_time) s.race_time = *session_.completion_time;
    else if (session_.race_start_time) s.race_time = time() - *session_.race_start_time;
    return s;
}

SessionResult simulate(const SessionConfig& config, const std::vector<ClientMessage>& trace,
                       std::optional<std::uint64_t> tick_limit) {
    SessionLoop loop(config);
    const double dt = config.hydro.dt;
    const auto max_ticks = static_cast<std::uint64_t>(std::ceil(config.max_duration / dt - 1e-9));
    SessionResult r;
    std::size_t next = 0;
    while (true) {
        while (next < trace.size() &&
               static_cast<std::uint64_t>(std::llround(message_time(trace[next]) / dt)) <= loop.ticks()) {
            if (!loop.apply(trace[next])) log::debug("message at t={} rejected", message_time(trace[next]));
            ++next;
        }
        const Phase phase = loop.session().phase;
        if (phase == Phase::finished) break;
        if (tick_limit) {
            if (loop.ticks() >= *tick_limit) break;
        } else {
            if (next == trace.size() && phase != Phase::racing) break;
            if (loop.ticks() >= max_ticks) break;
        }
        if (auto snap = loop.tick()) {
            r.hashes.push_back(snapshot_hash(*snap));
            r.snapshots.push_back(std::move(*snap));
        }
    }
    r.session = loop.session();
    r.ticks = loop.ticks();
    r.collisions = loop.collisions();
    r.final_boat = loop.boat();
    return r;
}

void add_physiology(const SessionConfig& config, SessionResult& r) {
    const double duration = static_cast<double>(r.ticks) * config.hydro.dt;
    if (!config.hr_csv.empty()) {
        std::ifstream in(config.hr_csv);
        if (!in) throw std::runtime_error("cannot open heart rate file " + config.hr_csv);
        r.heart_rate = physiology::read_hr_csv(in);
    } else {
        physiology::SyntheticHeartRate hr;
        hr.resting_bpm = 72.0;
        hr.working_bpm = config.working_bpm.value_or(default_working_bpm(config.technique));
        r.heart_rate = physiology::synthesize_heart_rate(hr, duration, config.seed);
    }
    if (!r.heart_rate.empty()) r.physiology = physiology::summarize(r.heart_rate, config.participant);
}

SessionResult run_headless(const SessionConfig& config, const std::vector<ClientMessage>& trace,
                           std::ostream* record) {
    SessionResult r = simulate(config, trace);
    add_physiology(config, r);
    if (record) {
        RecordWriter w(*record);
        w.write_config(config, trace);
        for (const auto& s : r.snapshots) w.write_snapshot(s);
        w.write_result(r);
    }
    return r;
}

void RecordWriter::write_line(const json& j) { out_ << j.dump() << '\n'; }

void RecordWriter::write_config(const SessionConfig& c, const std::vector<ClientMessage>& trace) {
    json j = c;
    json msgs = json::array();
    for (const auto& m : trace) msgs.push_back(to_json(m));
    j["trace"] = std::move(msgs);
    write_line(j);
}

void RecordWriter::write_message(const ClientMessage& m) { write_line(to_json(m)); }

void RecordWriter::write_snapshot(const StateSnapshot& s) {
    json j = to_json(s);
    j["hash"] = hex64(snapshot_hash(s));
    write_line(j);
}

void RecordWriter::write_result(const SessionResult& r) {
    json j = {{"type", "result"},
              {"phase", to_string(r.session.phase)},
              {"completion_time", r.session.completion_time ? json(*r.session.completion_time) : json(nullptr)},
              {"ticks", r.ticks},
              {"collisions", r.collisions},
              {"snapshots", r.snapshots.size()}};
    if (r.physiology) {
        json samples = json::array();
        for (const auto& s : r.heart_rate) samples.push_back({s.t, s.bpm});
        j["physiology"] = {{"avg_hr", r.physiology->avg_hr},
                           {"hr_max_predicted", r.physiology->hr_max_predicted},
                           {"avg_hr_pct", r.physiology->avg_hr_pct},
                           {"kcal", r.physiology->kcal},
                           {"weight_defaulted", r.physiology->weight_defaulted},
                           {"heart_rate", samples}};
    }
    write_line(j);
}

SessionRecord read_record(std::istream& in) {
    SessionRecord rec;
    std::string line;
    std::size_t lineno = 0;
    bool have_config = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::parse_error& e) {
            throw TraceError(lineno, std::string("invalid JSON: ") + e.what());
        }
        const auto type = j.value("type", std::string());
        if (type == "config") {
            rec.config = j.get<SessionConfig>();
            for (const auto& m : j.value("trace", json::array())) rec.trace.push_back(parse_client_message(m));
            have_config = true;
        } else if (type == "state") {
            rec.snapshots.push_back(std::move(j));
        } else if (type == "input" || type == "event") {
            try {
                rec.trace.push_back(parse_client_message(j));
            } catch (const std::exception& e) {
                throw TraceError(lineno, e.what());
            }
        } else if (type == "result") {
            rec.result = std::move(j);
        } else {
            throw TraceError(lineno, "unexpected record line type '" + type + "'");
        }
    }
    if (!have_config) throw std::runtime_error("record has no config line");
    return rec;
}

ReplayReport replay(const SessionRecord& record) {
    ReplayReport rep;
    std::optional<std::uint64_t> limit;
    if (record.result.is_object() && record.result.contains("ticks")) limit = record.result["ticks"].get<std::uint64_t>();
    const SessionResult r = simulate(record.config, record.trace, limit);
    const std::size_t common = std::min(r.snapshots.size(), record.snapshots.size());
    for (std::size_t i = 0; i < common; ++i) {
        json stored = record.snapshots[i];
        const std::string stored_hash = stored.value("hash", std::string());
        stored.erase("hash");
        const std::string expected_hash = hex64(r.hashes[i]);
        const bool same = stored == to_json(r.snapshots[i]) && stored_hash == expected_hash &&
                          hex64(fnv1a(stored.dump())) == stored_hash;
        if (!same) {
            rep.first_divergent_tick = r.snapshots[i].tick;
            rep.snapshots_checked = i;
            rep.message = "snapshot diverges at tick " + std::to_string(r.snapshots[i].tick);
            return rep;
        }
    }
    rep.snapshots_checked = common;
    if (r.snapshots.size() != record.snapshots.size()) {
        rep.first_divergent_tick = common < r.snapshots.size() ? r.snapshots[common].tick
                                                               : record.snapshots[common].value("tick", std::uint64_t{0});
        rep.message = "snapshot count differs: recorded " + std::to_string(record.snapshots.size()) +
                      ", replayed " + std::to_string(r.snapshots.size());
        return rep;
    }
    if (record.result.is_object()) {
        const json& ct = record.result.value("completion_time", json(nullptr));
        const json replayed = r.session.completion_time ? json(*r.session.completion_time) : json(nullptr);
        if (ct != replayed) {
            rep.message = "completion time differs";
            rep.first_divergent_tick = r.ticks;
            return rep;
        }
    }
    rep.ok = true;
    rep.message = "replay matches " + std::to_string(common) + " snapshots";
    return rep;
}

}  // namespace dragonboat
