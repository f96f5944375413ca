#include "hubsim/replay.hpp"

#include <charconv>
#include <fstream>

#include "hubsim/hash.hpp"

namespace hubsim {

std::string input_frame_to_line(const InputFrame& f) {
    nlohmann::ordered_json j;
    j["tick"] = f.tick;
    j["move"] = {quantized(f.move.x), quantized(f.move.y)};
    j["rot"] = f.rot;
    j["act"] = f.act;
    return j.dump();
}

InputFrame input_frame_from_line(const std::string& line) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
        throw ReplayFormatError(std::string("not JSON: ") + e.what());
    }
    InputFrame f;
    try {
        f.tick = j.at("tick").get<std::uint64_t>();
        const auto& m = j.at("move");
        if (!m.is_array() || m.size() != 2) throw ReplayFormatError("move must be [x, y]");
        f.move = {m[0].get<double>(), m[1].get<double>()};
        f.rot = j.value("rot", 0);
        f.act = j.value("act", false);
    } catch (const nlohmann::json::exception& e) {
        throw ReplayFormatError(std::string("bad input frame: ") + e.what());
    }
    if (f.rot < -1 || f.rot > 1) throw ReplayFormatError("rot must be -1, 0 or 1");
    return f;
}

std::vector<InputFrame> read_input_log(std::istream& in) {
    std::vector<InputFrame> frames;
    std::string line;
    std::size_t number = 0;
    while (std::getline(in, line)) {
        ++number;
        if (line.empty()) continue;
        try {
            frames.push_back(input_frame_from_line(line));
        } catch (const ReplayFormatError& e) {
            throw ReplayFormatError("input log line " + std::to_string(number) + ": " + e.what());
        }
    }
    return frames;
}

std::vector<InputFrame> read_input_log_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ReplayFormatError("cannot open input log " + path);
    return read_input_log(in);
}

void write_input_log(std::ostream& out, const std::vector<InputFrame>& frames) {
    for (const auto& f : frames) out << input_frame_to_line(f) << '\n';
}

std::string checkpoint_line(const Checkpoint& c) { return std::to_string(c.tick) + "\t" + to_hex(c.hash); }

void write_checkpoints(std::ostream& out, const std::vector<Checkpoint>& checkpoints) {
    for (const auto& c : checkpoints) out << checkpoint_line(c) << '\n';
}

std::vector<Checkpoint> read_checkpoints(std::istream& in) {
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    std::vector<Checkpoint> out;
    if (text.empty()) return out;
    if (text.back() != '\n') throw ReplayFormatError("checkpoint file is truncated (no final newline)");
    std::size_t pos = 0;
    std::size_t number = 0;
    while (pos < text.size()) {
        ++number;
        const std::size_t end = text.find('\n', pos);
        const std::string_view line(text.data() + pos, end - pos);
        pos = end + 1;
        const auto fail = [&](const std::string& why) {
            return ReplayFormatError("checkpoint line " + std::to_string(number) + ": " + why);
        };
        const std::size_t tab = line.find('\t');
        if (tab == std::string_view::npos || tab == 0) throw fail("expected tick<TAB>hash");
        const auto tick_s = line.substr(0, tab);
        const auto hash_s = line.substr(tab + 1);
        Checkpoint c;
        auto r1 = std::from_chars(tick_s.data(), tick_s.data() + tick_s.size(), c.tick);
        if (r1.ec != std::errc{} || r1.ptr != tick_s.data() + tick_s.size()) throw fail("bad tick");
        if (hash_s.size() != 16) throw fail("hash must be 16 hex digits");
        for (char ch : hash_s) {
            if (!((ch >= '0' && ch <= '9') || (ch >= 'a' && ch <= 'f'))) throw fail("hash must be lowercase hex");
        }
        std::from_chars(hash_s.data(), hash_s.data() + hash_s.size(), c.hash, 16);
        if (!out.empty() && c.tick <= out.back().tick) throw fail("ticks must be strictly increasing");
        out.push_back(c);
    }
    return out;
}

std::vector<Checkpoint> read_checkpoints_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ReplayFormatError("cannot open checkpoint file " + path);
    return read_checkpoints(in);
}

ReplayResult run_replay(std::shared_ptr<const SimContext> ctx, std::uint64_t seed, const std::vector<InputFrame>& log,
                        const std::vector<Checkpoint>& checkpoints) {
    for (std::size_t i = 0; i < log.size(); ++i) {
        if (log[i].tick != i) throw LogGap("LogGap: expected frame for tick " + std::to_string(i) + ", found " + std::to_string(log[i].tick));
    }
    for (const auto& c : checkpoints) {
        if (c.tick > log.size()) throw LogGap("LogGap: checkpoint at tick " + std::to_string(c.tick) + " lies beyond the input log");
    }
    WorldState world = init_world(std::move(ctx), seed);
    std::size_t next = 0;
    auto check = [&]() -> std::optional<ReplayResult> {
        while (next < checkpoints.size() && checkpoints[next].tick == world.tick) {
            const std::uint64_t actual = state_hash(world);
            if (actual != checkpoints[next].hash) return ReplayResult{false, world.tick, checkpoints[next].hash, actual};
            ++next;
        }
        return std::nullopt;
    };
    if (auto r = check()) return *r;
    for (const auto& f : log) {
        if (next >= checkpoints.size()) break;
        step(world, f);
        if (auto r = check()) return *r;
    }
    return ReplayResult{};
}

}  // namespace hubsim
