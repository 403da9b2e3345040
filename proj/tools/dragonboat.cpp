#include <chrono>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>

#include <CLI11.hpp>

#include "dragonboat/cohort.hpp"
#include "dragonboat/log.hpp"
#include "dragonboat/pilot.hpp"
#include "dragonboat/report.hpp"
#include "dragonboat/server.hpp"
#include "dragonboat/session.hpp"

using namespace dragonboat;

namespace {

// Thrown for flag combinations CLI11 cannot express; main prints usage.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

SessionConfig load_config(const std::string& path) {
    SessionConfig c;
    if (path.empty()) return c;
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config " + path);
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw std::runtime_error(path + ": " + e.what());
    }
    j.get_to(c);
    return c;
}

struct CommonFlags {
    std::string config;
    std::string technique;
    std::string track;
    std::optional<std::uint64_t> seed;
    std::optional<int> lane;
};

void add_common(CLI::App* app, CommonFlags& f) {
    app->add_option("--config", f.config, "session config JSON; flags override it")->check(CLI::ExistingFile);
    app->add_option("--technique", f.technique, "jc, ic or ec")->check(CLI::IsMember({"jc", "ic", "ec"}, CLI::ignore_case));
    app->add_option("--track", f.track, "straight or barrier")->check(CLI::IsMember({"straight", "barrier"}));
    app->add_option("--seed", f.seed, "session seed");
    app->add_option("--lane", f.lane, "lane index");
}

SessionConfig apply_common(const CommonFlags& f) {
    SessionConfig c = load_config(f.config);
    if (!f.technique.empty()) c.technique = parse_technique(f.technique);
    if (!f.track.empty()) {
        c.track_name = f.track;
        c.track = Track::preset(f.track);
    }
    if (f.seed) c.seed = *f.seed;
    if (f.lane) c.lane = *f.lane;
    return c;
}

void print_time(std::ostream& out, const SessionResult& r) {
    if (r.session.completion_time)
        out << "completion_time " << std::fixed << std::setprecision(3) << *r.session.completion_time << " s\n";
    else
        out << "did not finish (phase " << to_string(r.session.phase) << ", " << std::fixed << std::setprecision(3)
            << static_cast<double>(r.ticks) / 60.0 << " s simulated)\n";
}

int cmd_run(const CommonFlags& f, const std::string& script, bool pilot, double effort, const std::string& out,
            const std::string& hr_csv) {
    SessionConfig c = apply_common(f);
    Trace trace;
    if (pilot) {
        PilotParams p;
        p.effort = effort;
        c.input_source = InputSource::script;
        c.script = "pilot";
        trace = pilot_trace(c, p);
    } else {
        std::string name = script.empty() ? c.script : script;
        if (name.empty())
            name = std::string(to_string(c.technique)) + (c.track_name == "straight" ? "-full-throttle" : "-barrier");
        const auto path = resolve_script(name);
        trace = load_trace(path, c.hydro.dt);
        c.script = name;
        if (trace.meta.technique) {
            if (!f.technique.empty() && *trace.meta.technique != c.technique)
                throw UsageError("--technique " + f.technique + " conflicts with script '" + name + "' (authored for " +
                                 std::string(to_string(*trace.meta.technique)) + ")");
            c.technique = *trace.meta.technique;
        }
        if (trace.meta.track && f.track.empty() && f.config.empty()) {
            c.track_name = *trace.meta.track;
            c.track = Track::preset(c.track_name);
        }
    }
    c.input_source = InputSource::script;
    if (!hr_csv.empty()) c.hr_csv = hr_csv;
    if (!out.empty()) c.record_path = out;

    std::ofstream rec;
    if (!out.empty()) {
        rec.open(out);
        if (!rec) throw std::runtime_error("cannot write " + out);
    }
    const auto t0 = std::chrono::steady_clock::now();
    const SessionResult r = run_headless(c, trace.messages, out.empty() ? nullptr : &rec);
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    std::cout << "technique " << to_string(c.technique) << ", track " << c.track_name << '\n';
    print_time(std::cout, r);
    std::cout << "collisions " << r.collisions << '\n';
    if (r.physiology)
        std::cout << std::fixed << std::setprecision(4) << "avg_hr_pct " << r.physiology->avg_hr_pct << '\n'
                  << std::setprecision(2) << "kcal " << r.physiology->kcal
                  << (r.physiology->weight_defaulted ? " (default weight)" : "") << '\n';
    log::info("simulated {} ticks in {} s", r.ticks, wall);
    return 0;
}

int cmd_serve(const CommonFlags& f, std::uint16_t port, std::optional<std::uint16_t> device_port,
              const std::string& address, const std::string& record) {
    SessionConfig c = apply_common(f);
    if (c.input_source == InputSource::script) c.input_source = InputSource::socket_client;
    if (!record.empty()) c.record_path = record;
    ServerOptions o;
    o.address = address;
    o.port = port;
    o.device_port = device_port;
    o.handle_signals = true;
    RaceServer server(c, o);
    server.start();
    std::cout << "listening on ws://" << address << ':' << server.port() << '/';
    if (server.device_port()) std::cout << ", device tcp port " << *server.device_port();
    std::cout << std::endl;
    server.wait();
    server.stop();
    std::cout << "stopped after " << server.ticks() << " ticks\n";
    return 0;
}

int cmd_replay(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open record " + path);
    const SessionRecord rec = read_record(in);
    const ReplayReport rep = replay(rec);
    if (rep.ok) {
        std::cout << "OK " << rep.message << '\n';
        return 0;
    }
    std::cout << "MISMATCH " << rep.message;
    if (rep.first_divergent_tick) std::cout << " (first divergent tick " << *rep.first_divergent_tick << ")";
    std::cout << '\n';
    return 1;
}

int cmd_stats(const std::string& input, std::vector<std::string> wanted, double alpha, const std::string& csv_out) {
    std::vector<report::Observation> rows;
    if (std::filesystem::is_directory(input)) {
        rows = report::read_record_dir(input);
    } else {
        std::ifstream in(input);
        if (!in) throw std::runtime_error("cannot open " + input);
        rows = report::read_long_csv(in);
    }
    const auto available = report::measures(rows);
    if (available.empty()) throw std::runtime_error("no observations in " + input);
    if (wanted.empty()) wanted = available;
    for (const auto& m : wanted)
        if (std::find(available.begin(), available.end(), m) == available.end()) {
            std::string list;
            for (const auto& a : available) list += (list.empty() ? "" : ", ") + a;
            throw std::runtime_error("measure '" + m + "' not found (available: " + list + ")");
        }

    std::vector<report::Battery> batteries;
    for (const auto& m : wanted) {
        batteries.push_back(report::run_battery(report::pivot(rows, m), m, alpha));
        if (batteries.size() > 1) std::cout << '\n';
        report::print_battery(std::cout, batteries.back());
    }
    if (!csv_out.empty()) {
        std::ofstream out(csv_out);
        if (!out) throw std::runtime_error("cannot write " + csv_out);
        report::write_battery_csv(out, batteries);
    }
    return 0;
}

int cmd_score(const std::string& instrument, const std::string& responses, const std::string& out_path) {
    std::ifstream in(responses);
    if (!in) throw std::runtime_error("cannot open " + responses);
    const auto rows = report::score_questionnaire_csv(in, stats::parse_instrument(instrument));
    if (out_path.empty()) {
        report::write_long_csv(std::cout, rows);
    } else {
        std::ofstream out(out_path);
        if (!out) throw std::runtime_error("cannot write " + out_path);
        report::write_long_csv(out, rows);
    }
    return 0;
}

int cmd_cohort(const CohortParams& params, const std::string& out_dir, const std::string& csv, bool serial) {
    const auto jobs = plan_cohort(params);
    const auto t0 = std::chrono::steady_clock::now();
    const auto outcomes = serial ? run_batch_serial(jobs) : run_batch_parallel(jobs);
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!out_dir.empty()) write_records(out_dir, outcomes);

    std::vector<report::Observation> rows;
    std::size_t unfinished = 0;
    for (const auto& o : outcomes) {
        const std::string cond(to_string(o.technique));
        if (o.completion_time) rows.push_back({o.subject, cond, "completion_time", *o.completion_time});
        else ++unfinished;
        rows.push_back({o.subject, cond, "avg_hr_pct", o.avg_hr_pct});
        rows.push_back({o.subject, cond, "kcal", o.kcal});
        rows.push_back({o.subject, cond, "collisions", static_cast<double>(o.collisions)});
    }
    if (!csv.empty()) {
        std::ofstream out(csv);
        if (!out) throw std::runtime_error("cannot write " + csv);
        report::write_long_csv(out, rows);
    }
    std::cout << outcomes.size() << " sessions (" << unfinished << " unfinished) in " << std::fixed
              << std::setprecision(2) << wall << " s\n";
    return 0;
}

int cmd_scripts(const std::string& dir) {
    std::filesystem::create_directories(dir);
    for (const auto& s : bundled_traces()) {
        const auto path = std::filesystem::path(dir) / (s.name + ".jsonl");
        std::ofstream out(path);
        if (!out) throw std::runtime_error("cannot write " + path.string());
        write_trace(out, s.trace);
        std::cout << path.string() << " (" << s.trace.messages.size() << " messages)\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Dragon boat race simulator"};
    app.require_subcommand(1);

    CommonFlags run_flags;
    std::string run_script, run_out, run_hr;
    bool run_pilot = false;
    double run_effort = 1.0;
    auto* run = app.add_subcommand("run", "run a scripted session headless");
    add_common(run, run_flags);
    auto* script_opt = run->add_option("--script", run_script, "bundled script name or trace path");
    auto* pilot_flag = run->add_flag("--pilot", run_pilot, "steer with the built-in pilot instead of a script");
    script_opt->excludes(pilot_flag);
    run->add_option("--effort", run_effort, "pilot effort in (0, 1]")->check(CLI::Range(0.01, 1.0))->needs(pilot_flag);
    run->add_option("--out", run_out, "write the session record (JSON lines)");
    run->add_option("--hr", run_hr, "heart-rate CSV (t_seconds,bpm)")->check(CLI::ExistingFile);

    CommonFlags serve_flags;
    std::uint16_t serve_port = 8080;
    std::optional<std::uint16_t> serve_device_port;
    std::string serve_address = "127.0.0.1", serve_record;
    auto* serve = app.add_subcommand("serve", "run the live websocket server");
    add_common(serve, serve_flags);
    serve->add_option("--port", serve_port, "websocket port");
    serve->add_option("--device-port", serve_device_port, "raw TCP port for an exertion controller");
    serve->add_option("--address", serve_address, "listen address");
    serve->add_option("--record", serve_record, "session record path");

    std::string replay_record;
    auto* rep = app.add_subcommand("replay", "re-simulate a record and verify its snapshot hashes");
    rep->add_option("--record", replay_record, "session record")->required()->check(CLI::ExistingFile);

    std::string stats_input, stats_csv;
    std::vector<std::string> stats_measures;
    double stats_alpha = 0.05;
    auto* st = app.add_subcommand("stats", "Friedman, post-hoc and ANOVA battery");
    st->add_option("--input", stats_input, "record directory or long-format CSV")->required()->check(CLI::ExistingPath);
    st->add_option("--measure", stats_measures, "measure to test (repeatable; default all)");
    st->add_option("--alpha", stats_alpha, "family-wise alpha")->check(CLI::Range(0.0, 1.0));
    st->add_option("--csv", stats_csv, "also write results as CSV");

    std::string score_instrument, score_responses, score_out;
    auto* sc = app.add_subcommand("score", "score questionnaire responses");
    sc->add_option("--instrument", score_instrument, "ueq_s, nasa_tlx or ssq")->required();
    sc->add_option("--responses", score_responses, "CSV: subject,condition,item1..itemN")->required()->check(CLI::ExistingFile);
    sc->add_option("--out", score_out, "long-format CSV output (default stdout)");

    CohortParams cohort_params;
    std::string cohort_out, cohort_csv;
    bool cohort_serial = false;
    auto* co = app.add_subcommand("cohort", "simulate a synthetic cohort across all techniques");
    co->add_option("--subjects", cohort_params.subjects, "number of subjects")->check(CLI::PositiveNumber);
    co->add_option("--seed", cohort_params.seed, "cohort seed");
    co->add_option("--track", cohort_params.track, "straight or barrier")->check(CLI::IsMember({"straight", "barrier"}));
    co->add_option("--out", cohort_out, "directory for session records");
    co->add_option("--csv", cohort_csv, "long-format CSV of outcome measures");
    co->add_flag("--serial", cohort_serial, "run without OpenMP");

    std::string scripts_dir = bundled_scripts_dir().string();
    auto* scr = app.add_subcommand("scripts", "regenerate the bundled input scripts");
    scr->add_option("--out", scripts_dir, "output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (run->parsed()) return cmd_run(run_flags, run_script, run_pilot, run_effort, run_out, run_hr);
        if (serve->parsed()) return cmd_serve(serve_flags, serve_port, serve_device_port, serve_address, serve_record);
        if (rep->parsed()) return cmd_replay(replay_record);
        if (st->parsed()) return cmd_stats(stats_input, stats_measures, stats_alpha, stats_csv);
        if (sc->parsed()) return cmd_score(score_instrument, score_responses, score_out);
        if (co->parsed()) return cmd_cohort(cohort_params, cohort_out, cohort_csv, cohort_serial);
        if (scr->parsed()) return cmd_scripts(scripts_dir);
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n\n";
        for (auto* sub : app.get_subcommands()) std::cerr << sub->help();
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
