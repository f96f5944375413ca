#include "hubsim/cli.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "hubsim/hash.hpp"
#include "hubsim/replay.hpp"
#include "hubsim/server.hpp"
#include "hubsim/world.hpp"

#ifndef HUBSIM_DATA_DIR
#define HUBSIM_DATA_DIR "data"
#endif
#ifndef HUBSIM_WEB_DIR
#define HUBSIM_WEB_DIR "web"
#endif

namespace hubsim {

namespace {

enum class LogLevel { error, warn, info, debug };

class Log {
public:
    explicit Log(std::ostream& err) : err_(err) {
        const char* env = std::getenv("SIM_LOG");
        if (!env) return;
        const std::string v(env);
        if (v == "error") level_ = LogLevel::error;
        else if (v == "warn") level_ = LogLevel::warn;
        else if (v == "info") level_ = LogLevel::info;
        else if (v == "debug") level_ = LogLevel::debug;
        else warn("ignoring SIM_LOG='" + v + "', expected error, warn, info or debug");
    }
    void error(const std::string& m) const { write(LogLevel::error, "error", m); }
    void warn(const std::string& m) const { write(LogLevel::warn, "warn", m); }
    void info(const std::string& m) const { write(LogLevel::info, "info", m); }
    void debug(const std::string& m) const { write(LogLevel::debug, "debug", m); }

private:
    void write(LogLevel l, const char* tag, const std::string& m) const {
        if (l <= level_) err_ << tag << ": " << m << "\n";
    }
    std::ostream& err_;
    LogLevel level_ = LogLevel::warn;
};

struct InputPaths {
    std::string site = std::string(HUBSIM_DATA_DIR) + "/durlacher-tor-mini.site.json";
    std::string scenario = std::string(HUBSIM_DATA_DIR) + "/tour.json";
    std::string schedule = std::string(HUBSIM_DATA_DIR) + "/schedule.json";
    std::string catalog = std::string(HUBSIM_DATA_DIR) + "/catalog.json";
    std::uint64_t seed = 0;
};

// Raised for invalid or missing simulation inputs (exit 2).
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

std::string read_text(const std::string& path) {
    if (!std::filesystem::is_regular_file(path)) throw InputError("file not found: " + path);
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot read file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void add_input_options(CLI::App& cmd, InputPaths& p) {
    cmd.add_option("--site", p.site, "Site map file")->capture_default_str();
    cmd.add_option("--scenario", p.scenario, "Barrier scenario file")->capture_default_str();
    cmd.add_option("--schedule", p.schedule, "Transit schedule file")->capture_default_str();
    cmd.add_option("--catalog", p.catalog, "Archetype catalog file")->capture_default_str();
    cmd.add_option("--seed", p.seed, "World seed")->capture_default_str();
}

struct LoadedInputs {
    std::string site_text;
    std::string scenario_text;
    std::shared_ptr<const SimContext> ctx;
};

template <class F>
auto parse_source(const std::string& path, F&& parse) {
    const std::string text = read_text(path);
    try {
        return parse(text);
    } catch (const std::exception& e) {
        throw InputError(path + ": " + e.what());
    }
}

LoadedInputs load_inputs(const InputPaths& p, const Log& log) {
    LoadedInputs in;
    in.site_text = read_text(p.site);
    in.scenario_text = read_text(p.scenario);
    auto site = parse_source(p.site, [](const std::string& t) { return load_site(t); });
    auto scenario = parse_source(p.scenario, [](const std::string& t) { return load_scenario(t); });
    auto schedule = parse_source(p.schedule, [](const std::string& t) { return load_schedule(t); });
    auto catalog = parse_source(p.catalog, [](const std::string& t) { return load_catalog(t); });
    try {
        in.ctx = make_context(std::move(site), std::move(scenario), std::move(schedule), std::move(catalog));
    } catch (const WorldError& e) {
        throw InputError(e.what());
    }
    log.info("loaded site " + p.site + " (" + std::to_string(in.ctx->site.features.size()) + " features)");
    return in;
}

void write_lines(const std::string& path, const std::string& body) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write file: " + path);
    out << body;
}

struct RunOptions {
    InputPaths inputs;
    std::optional<std::uint64_t> ticks;
    std::string script;
    std::string out_events;
    std::string out_checkpoints;
    std::string record;
};

int cmd_run(const RunOptions& o, std::ostream& out, const Log& log) {
    const auto in = load_inputs(o.inputs, log);
    std::vector<InputFrame> script;
    if (!o.script.empty()) {
        read_text(o.script);
        script = read_input_log_file(o.script);
    }
    const std::uint64_t ticks = o.ticks.value_or(o.script.empty() ? 1200 : script.size());

    WorldState world = init_world(in.ctx, o.inputs.seed);
    std::ostringstream events;
    std::ostringstream checkpoints;
    std::vector<InputFrame> consumed;
    std::map<std::string, std::uint64_t> by_kind;
    std::uint64_t event_count = 0;
    std::uint64_t tours_completed = 0;
    checkpoints << checkpoint_line({world.tick, state_hash(world)}) << '\n';
    while (world.tick < ticks) {
        const InputFrame frame = world.tick < script.size() ? script[world.tick] : neutral_frame(world.tick);
        consumed.push_back(frame);
        for (const Event& e : step(world, frame)) {
            events << event_to_json(e).dump() << '\n';
            ++by_kind[std::string(to_string(e.kind()))];
            ++event_count;
            if (e.kind() == EventKind::TourCompleted) ++tours_completed;
        }
        if (world.tick % kCheckpointInterval == 0) checkpoints << checkpoint_line({world.tick, state_hash(world)}) << '\n';
    }
    if (!o.out_events.empty()) write_lines(o.out_events, events.str());
    if (!o.out_checkpoints.empty()) write_lines(o.out_checkpoints, checkpoints.str());
    if (!o.record.empty()) {
        std::ostringstream rec;
        write_input_log(rec, consumed);
        write_lines(o.record, rec.str());
    }
    out << "ticks=" << world.tick << " events=" << event_count << " tour_completed=" << (tours_completed > 0 ? "true" : "false") << "\n";
    for (const auto& [kind, n] : by_kind) out << "  " << kind << "=" << n << "\n";
    return exit_ok;
}

int cmd_validate(const InputPaths& p, bool json, std::ostream& out) {
    auto report = nlohmann::json::array();
    auto fail = [&](const std::string& source, const std::string& message) {
        report.push_back({{"source", source}, {"severity", "error"}, {"subject", ""}, {"message", message}});
    };
    auto merge = [&](const nlohmann::json& issues) {
        for (const auto& i : issues) report.push_back(i);
    };
    auto load = [&](const std::string& source, const std::string& path, auto parse) -> decltype(parse(std::string{})) {
        try {
            return parse(read_text(path));
        } catch (const std::exception& e) {
            fail(source, path + ": " + e.what());
            return std::nullopt;
        }
    };
    auto site = load("site", p.site, [](const std::string& t) -> std::optional<SiteMap> { return load_site(t); });
    auto scenario = load("scenario", p.scenario, [](const std::string& t) -> std::optional<BarrierScenario> { return load_scenario(t); });
    auto schedule = load("schedule", p.schedule, [](const std::string& t) -> std::optional<TransitSchedule> { return load_schedule(t); });
    auto catalog = load("catalog", p.catalog, [](const std::string& t) -> std::optional<ArchetypeCatalog> { return load_catalog(t); });
    if (site) merge(report_to_json(validate_site(*site), "site"));
    if (site && scenario) merge(report_to_json(validate_scenario(*scenario, *site), "scenario"));
    if (schedule) merge(report_to_json(validate_schedule(*schedule), "schedule"));
    if (schedule && site && catalog) merge(report_to_json(validate_schedule_against(*schedule, *site, *catalog), "schedule"));
    if (catalog) merge(report_to_json(validate_catalog(*catalog), "catalog"));

    std::size_t errors = 0;
    for (const auto& i : report) errors += i["severity"] == "error" ? 1 : 0;
    const bool ok = errors == 0;
    if (json) {
        out << nlohmann::json{{"ok", ok}, {"errors", errors}, {"issues", report}}.dump(2) << "\n";
    } else {
        for (const auto& i : report) {
            out << i["severity"].get<std::string>() << " " << i["source"].get<std::string>();
            if (!i["subject"].get<std::string>().empty()) out << " " << i["subject"].get<std::string>();
            out << ": " << i["message"].get<std::string>() << "\n";
        }
        out << (ok ? "ok" : "invalid") << " errors=" << errors << "\n";
    }
    return ok ? exit_ok : exit_validation;
}

int cmd_replay(const InputPaths& p, const std::string& record, const std::string& checkpoints_path, std::ostream& out,
               const Log& log) {
    const auto in = load_inputs(p, log);
    read_text(record);
    read_text(checkpoints_path);
    const auto frames = read_input_log_file(record);
    const auto checkpoints = read_checkpoints_file(checkpoints_path);
    ReplayResult r;
    try {
        r = run_replay(in.ctx, p.seed, frames, checkpoints);
    } catch (const LogGap& e) {
        throw ReplayFormatError(e.what());
    }
    if (r.pass) {
        out << "pass ticks=" << frames.size() << " checkpoints=" << checkpoints.size() << "\n";
        return exit_ok;
    }
    out << "divergence tick=" << r.tick << " expected=" << to_hex(r.expected) << " actual=" << to_hex(r.actual) << "\n";
    return exit_divergence;
}

struct ServeOptions {
    InputPaths inputs;
    std::uint16_t port = 8080;
    std::string address = "127.0.0.1";
    std::string static_dir = HUBSIM_WEB_DIR;
    std::string record;
};

int cmd_serve(const ServeOptions& o, std::ostream& out, const Log& log) {
    const auto in = load_inputs(o.inputs, log);
    ServerOptions so;
    so.address = o.address;
    so.port = o.port;
    so.seed = o.inputs.seed;
    so.site_text = in.site_text;
    so.scenario_text = in.scenario_text;
    so.static_dir = o.static_dir;
    so.record_dir = o.record;
    Server server(in.ctx, so);
    const auto port = server.start();
    out << "listening on http://" << o.address << ":" << port << " (WebSocket /session)" << std::endl;
    server.wait();
    log.info("server stopped at tick " + std::to_string(server.latest_tick()));
    return exit_ok;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"hubsim: transit hub simulation with a guided accessibility tour"};
    app.require_subcommand(1);
    const Log log(err);

    RunOptions run;
    auto* run_cmd = app.add_subcommand("run", "Run headless with a scripted avatar");
    add_input_options(*run_cmd, run.inputs);
    run_cmd->add_option("--ticks", run.ticks, "Ticks to simulate (default: script length, or 1200 without a script)");
    run_cmd->add_option("--script", run.script, "Avatar input log (one JSON frame per line)");
    run_cmd->add_option("--out-events", run.out_events, "Write events as newline-delimited JSON");
    run_cmd->add_option("--out-checkpoints", run.out_checkpoints, "Write state hashes every 100 ticks");
    run_cmd->add_option("--record", run.record, "Write the consumed input frames as a replay log");

    InputPaths validate_inputs;
    bool json = false;
    auto* validate_cmd = app.add_subcommand("validate", "Validate site, scenario, schedule and catalog");
    add_input_options(*validate_cmd, validate_inputs);
    validate_cmd->add_flag("--json", json, "Print a machine-readable JSON report");

    InputPaths replay_inputs;
    std::string record;
    std::string checkpoints;
    auto* replay_cmd = app.add_subcommand("replay", "Verify an input log against recorded checkpoints");
    add_input_options(*replay_cmd, replay_inputs);
    replay_cmd->add_option("--record", record, "Input log to replay")->required();
    replay_cmd->add_option("--checkpoints,--out-checkpoints", checkpoints, "Checkpoint file to compare against")->required();

    ServeOptions serve;
    auto* serve_cmd = app.add_subcommand("serve", "Serve the simulation over WebSocket");
    add_input_options(*serve_cmd, serve.inputs);
    serve_cmd->add_option("--port", serve.port, "TCP port (0 picks a free port)")->capture_default_str();
    serve_cmd->add_option("--address", serve.address, "Bind address")->capture_default_str();
    serve_cmd->add_option("--static", serve.static_dir, "Directory of static assets served under /")->capture_default_str();
    serve_cmd->add_option("--record", serve.record, "Directory for per-session input logs and checkpoints");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? exit_ok : exit_validation;
    }

    try {
        if (*run_cmd) return cmd_run(run, out, log);
        if (*validate_cmd) return cmd_validate(validate_inputs, json, out);
        if (*replay_cmd) return cmd_replay(replay_inputs, record, checkpoints, out, log);
        if (*serve_cmd) return cmd_serve(serve, out, log);
    } catch (const InputError& e) {
        log.error(e.what());
        return exit_validation;
    } catch (const ReplayFormatError& e) {
        log.error(std::string("format error: ") + e.what());
        return exit_format;
    } catch (const std::exception& e) {
        log.error(e.what());
        return exit_validation;
    }
    return exit_ok;
}

}  // namespace hubsim
