#include "hubsim/wire.hpp"

#include <algorithm>
#include <map>

#include "hubsim/hash.hpp"

namespace hubsim {

namespace {

using ojson = nlohmann::ordered_json;

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

ojson vec2_json(Vec2 v) { return ojson::array({quantized(v.x), quantized(v.y)}); }
Vec2 q(Vec2 v) { return {quantized(v.x), quantized(v.y)}; }

Vec2 read_vec2(const nlohmann::json& j) {
    if (!j.is_array() || j.size() != 2) throw std::runtime_error("expected [x, y]");
    return {j[0].get<double>(), j[1].get<double>()};
}

ojson ground_json(const GroundPath& p) {
    ojson arr = ojson::array();
    for (const auto& pt : p) arr.push_back(ojson::array({pt.level, quantized(pt.pos.x), quantized(pt.pos.y)}));
    return arr;
}

GroundPath read_ground(const nlohmann::json& j) {
    GroundPath out;
    for (const auto& pt : j) out.push_back({pt.at(0).get<int>(), {pt.at(1).get<double>(), pt.at(2).get<double>()}});
    return out;
}

ojson agent_json(const AgentView& a) {
    return ojson{{"id", a.id},
                 {"kind", std::string(to_string(a.kind))},
                 {"archetype", a.archetype},
                 {"level", a.level},
                 {"pos", vec2_json(a.pos)},
                 {"speed", quantized(a.speed)}};
}

AgentView read_agent(const nlohmann::json& j) {
    AgentView a;
    a.id = j.at("id").get<AgentId>();
    const auto kind = agent_kind_from_string(j.at("kind").get<std::string>());
    if (!kind) throw std::runtime_error("unknown agent kind");
    a.kind = *kind;
    a.archetype = j.at("archetype").get<std::size_t>();
    a.level = j.at("level").get<int>();
    a.pos = read_vec2(j.at("pos"));
    a.speed = j.at("speed").get<double>();
    return a;
}

ojson avatar_json(const AvatarView& a) {
    ojson j{{"level", a.level}, {"pos", vec2_json(a.pos)}, {"heading", a.heading}};
    j["transit"] = a.transit.empty() ? ojson(nullptr) : ojson(a.transit);
    return j;
}

AvatarView read_avatar(const nlohmann::json& j) {
    AvatarView a;
    a.level = j.at("level").get<int>();
    a.pos = read_vec2(j.at("pos"));
    a.heading = j.at("heading").get<int>();
    if (j.contains("transit") && j["transit"].is_string()) a.transit = j["transit"].get<std::string>();
    return a;
}

ojson signals_json(const std::vector<SignalView>& s) {
    ojson arr = ojson::array();
    for (const auto& v : s) arr.push_back(ojson{{"id", v.id}, {"color", std::string(to_string(v.color))}});
    return arr;
}

SignalColor color_from_string(const std::string& s) {
    if (s == "green") return SignalColor::green;
    if (s == "yellow") return SignalColor::yellow;
    if (s == "red") return SignalColor::red;
    throw std::runtime_error("unknown signal color '" + s + "'");
}

std::vector<SignalView> read_signals(const nlohmann::json& j) {
    std::vector<SignalView> out;
    for (const auto& v : j) out.push_back({v.at("id").get<std::string>(), color_from_string(v.at("color").get<std::string>())});
    return out;
}

ojson tour_json(const TourView& t) {
    ojson phases = ojson::array();
    for (auto p : t.phases) phases.push_back(std::string(to_string(p)));
    return ojson{{"target_index", t.target_index}, {"phases", phases}, {"completed", t.completed}, {"guided_path", ground_json(t.guided_path)}};
}

TourView read_tour(const nlohmann::json& j) {
    TourView t;
    t.target_index = j.at("target_index").get<std::size_t>();
    for (const auto& p : j.at("phases")) {
        const auto s = p.get<std::string>();
        if (s == "Guided") t.phases.push_back(BarrierPhase::guided);
        else if (s == "Approached") t.phases.push_back(BarrierPhase::approached);
        else if (s == "Resolved") t.phases.push_back(BarrierPhase::resolved);
        else throw std::runtime_error("unknown barrier phase '" + s + "'");
    }
    t.completed = j.at("completed").get<bool>();
    t.guided_path = read_ground(j.at("guided_path"));
    return t;
}

MutationRecord read_mutation(const nlohmann::json& j) {
    MutationRecord m;
    m.barrier_id = j.at("barrier").get<std::string>();
    m.barrier_index = j.at("barrier_index").get<std::size_t>();
    m.kind = j.at("kind").get<std::string>();
    m.tick = j.at("tick").get<std::uint64_t>();
    if (m.kind == "AddGuideStripSegment") {
        m.guide_strip = j.at("guide_strip").get<std::string>();
        for (const auto& p : j.at("polyline")) m.polyline.push_back(read_vec2(p));
    } else if (m.kind == "ClearObstacles") {
        m.guide_strip = j.at("guide_strip").get<std::string>();
        for (const auto& o : j.at("obstacles")) m.obstacles.push_back({o.at("id").get<std::string>(), read_vec2(o.at("displacement"))});
        m.duration = j.at("duration").get<double>();
    } else if (m.kind == "ActivateArrowGuides") {
        m.arrows = read_ground(j.at("arrows"));
    } else {
        throw std::runtime_error("unknown mutation kind '" + m.kind + "'");
    }
    return m;
}

std::vector<MutationRecord> read_mutations(const nlohmann::json& j) {
    std::vector<MutationRecord> out;
    for (const auto& m : j) out.push_back(read_mutation(m));
    return out;
}

ojson mutations_json(const std::vector<MutationRecord>& ms) {
    ojson arr = ojson::array();
    for (const auto& m : ms) arr.push_back(mutation_to_json(m));
    return arr;
}

MutationRecord quantize_record(MutationRecord m) {
    for (auto& p : m.polyline) p = q(p);
    for (auto& o : m.obstacles) o.displacement = q(o.displacement);
    m.duration = quantized(m.duration);
    for (auto& p : m.arrows) p.pos = q(p.pos);
    return m;
}

Event normalized_event(const Event& e) { return event_from_json(event_to_json(e)); }

}  // namespace

DecodeError::DecodeError(std::string code, std::size_t offset, const std::string& reason)
    : std::runtime_error(reason), code_(std::move(code)), offset_(offset) {}

ojson mutation_to_json(const MutationRecord& m) {
    ojson j{{"barrier", m.barrier_id}, {"barrier_index", m.barrier_index}, {"kind", m.kind}, {"tick", m.tick}};
    if (m.kind == "AddGuideStripSegment") {
        j["guide_strip"] = m.guide_strip;
        ojson line = ojson::array();
        for (Vec2 p : m.polyline) line.push_back(vec2_json(p));
        j["polyline"] = line;
    } else if (m.kind == "ClearObstacles") {
        j["guide_strip"] = m.guide_strip;
        ojson obs = ojson::array();
        for (const auto& o : m.obstacles) obs.push_back(ojson{{"id", o.obstacle_id}, {"displacement", vec2_json(o.displacement)}});
        j["obstacles"] = obs;
        j["duration"] = quantized(m.duration);
    } else {
        j["arrows"] = ground_json(m.arrows);
    }
    return j;
}

ojson snapshot_to_json(const Snapshot& s) {
    ojson j;
    j["t"] = "snapshot";
    j["tick"] = s.tick;
    j["full"] = true;
    j["avatar"] = avatar_json(s.avatar);
    j["agents"] = ojson::array();
    for (const auto& a : s.agents) j["agents"].push_back(agent_json(a));
    j["signals"] = signals_json(s.signals);
    j["tour"] = tour_json(s.tour);
    j["mutations"] = mutations_json(s.mutations);
    return j;
}

std::string encode(const WireMessage& msg) {
    ojson j = std::visit(
        overloaded{
            [](const Hello& m) { return ojson{{"t", "hello"}, {"proto", m.proto}, {"name", m.name}}; },
            [](const InputMsg& m) {
                return ojson{{"t", "input"},
                             {"tick", m.frame.tick},
                             {"move", vec2_json(m.frame.move)},
                             {"rot", m.frame.rot},
                             {"act", m.frame.act}};
            },
            [](const Ping& m) { return ojson{{"t", "ping"}, {"ts", quantized(m.ts)}}; },
            [](const Resync&) { return ojson{{"t", "resync"}}; },
            [](const Welcome& m) {
                return ojson{{"t", "welcome"},
                             {"session", m.session_id},
                             {"tick_hz", m.tick_hz},
                             {"site_digest", m.site_digest},
                             {"scenario_digest", m.scenario_digest}};
            },
            [](const Snapshot& m) { return snapshot_to_json(m); },
            [](const Delta& m) {
                ojson j{{"t", "delta"}, {"tick", m.tick}};
                j["changed_agents"] = ojson::array();
                for (const auto& a : m.changed_agents) j["changed_agents"].push_back(agent_json(a));
                j["removed_agent_ids"] = m.removed_agent_ids;
                if (m.avatar) j["avatar"] = avatar_json(*m.avatar);
                if (m.tour) j["tour"] = tour_json(*m.tour);
                if (m.signals) j["signals"] = signals_json(*m.signals);
                if (m.mutations) j["mutations"] = mutations_json(*m.mutations);
                j["events"] = ojson::array();
                for (const auto& e : m.events) j["events"].push_back(event_to_json(e));
                return j;
            },
            [](const Pong& m) { return ojson{{"t", "pong"}, {"ts", quantized(m.ts)}}; },
            [](const ErrorMsg& m) { return ojson{{"t", "error"}, {"code", m.code}, {"message", m.message}}; },
            [](const Warning& m) { return ojson{{"t", "warning"}, {"code", m.code}, {"message", m.message}, {"dropped", m.dropped}}; },
        },
        msg);
    return j.dump();
}

WireMessage decode(std::string_view text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw DecodeError("BAD_FRAME", e.byte, std::string("invalid JSON: ") + e.what());
    }
    if (!j.is_object() || !j.contains("t") || !j["t"].is_string()) throw DecodeError("BAD_FRAME", 0, "frame needs a string field 't'");
    const auto t = j["t"].get<std::string>();
    try {
        if (t == "hello") return Hello{j.at("proto").get<int>(), j.value("name", std::string{})};
        if (t == "input") {
            InputFrame f;
            f.tick = j.at("tick").get<std::uint64_t>();
            f.move = read_vec2(j.at("move"));
            f.rot = j.value("rot", 0);
            f.act = j.value("act", false);
            return InputMsg{f};
        }
        if (t == "ping") return Ping{j.at("ts").get<double>()};
        if (t == "resync") return Resync{};
        if (t == "welcome") {
            return Welcome{j.at("session").get<std::string>(), j.at("tick_hz").get<int>(), j.at("site_digest").get<std::string>(),
                           j.at("scenario_digest").get<std::string>()};
        }
        if (t == "snapshot") {
            Snapshot s;
            s.tick = j.at("tick").get<std::uint64_t>();
            s.avatar = read_avatar(j.at("avatar"));
            for (const auto& a : j.at("agents")) s.agents.push_back(read_agent(a));
            s.signals = read_signals(j.at("signals"));
            s.tour = read_tour(j.at("tour"));
            s.mutations = read_mutations(j.at("mutations"));
            return s;
        }
        if (t == "delta") {
            Delta d;
            d.tick = j.at("tick").get<std::uint64_t>();
            for (const auto& a : j.at("changed_agents")) d.changed_agents.push_back(read_agent(a));
            d.removed_agent_ids = j.at("removed_agent_ids").get<std::vector<AgentId>>();
            if (j.contains("avatar")) d.avatar = read_avatar(j["avatar"]);
            if (j.contains("tour")) d.tour = read_tour(j["tour"]);
            if (j.contains("signals")) d.signals = read_signals(j["signals"]);
            if (j.contains("mutations")) d.mutations = read_mutations(j["mutations"]);
            for (const auto& e : j.at("events")) d.events.push_back(event_from_json(e));
            return d;
        }
        if (t == "pong") return Pong{j.at("ts").get<double>()};
        if (t == "error") return ErrorMsg{j.at("code").get<std::string>(), j.at("message").get<std::string>()};
        if (t == "warning") {
            return Warning{j.at("code").get<std::string>(), j.at("message").get<std::string>(), j.value("dropped", std::uint64_t{0})};
        }
    } catch (const std::exception& e) {
        throw DecodeError("BAD_FRAME", 0, "malformed '" + t + "' frame: " + e.what());
    }
    throw DecodeError("UNSUPPORTED", 0, "unsupported message type '" + t + "'");
}

Snapshot make_snapshot(const WorldState& world) {
    Snapshot s;
    s.tick = world.tick;
    const auto& av = world.avatar;
    s.avatar = {av.level, q(av.pos), av.heading, av.transit ? av.transit->connector_id : std::string{}};
    s.agents.reserve(world.agents.size());
    for (const auto& [id, a] : world.agents) s.agents.push_back({id, a.kind, a.archetype_id, a.level, q(a.pos), quantized(a.speed)});
    for (const auto& [id, color] : world.signals) s.signals.push_back({id, color});
    s.tour.target_index = world.tour.target_index;
    s.tour.phases = world.tour.phases;
    s.tour.completed = world.tour.completed;
    s.tour.guided_path = world.tour.guided_path;
    for (auto& p : s.tour.guided_path) p.pos = q(p.pos);
    for (const auto& m : world.mutations_applied) s.mutations.push_back(quantize_record(m));
    return s;
}

Delta make_delta(const Snapshot& prev, const Snapshot& curr, std::vector<Event> events) {
    Delta d;
    d.tick = curr.tick;
    std::map<AgentId, const AgentView*> before;
    for (const auto& a : prev.agents) before[a.id] = &a;
    for (const auto& a : curr.agents) {
        auto it = before.find(a.id);
        if (it == before.end() || !(*it->second == a)) d.changed_agents.push_back(a);
        if (it != before.end()) before.erase(it);
    }
    for (const auto& [id, a] : before) d.removed_agent_ids.push_back(id);
    if (!(prev.avatar == curr.avatar)) d.avatar = curr.avatar;
    if (!(prev.tour == curr.tour)) d.tour = curr.tour;
    if (prev.signals != curr.signals) {
        std::vector<SignalView> changed;
        for (const auto& s : curr.signals) {
            auto it = std::find_if(prev.signals.begin(), prev.signals.end(), [&](const SignalView& p) { return p.id == s.id; });
            if (it == prev.signals.end() || !(*it == s)) changed.push_back(s);
        }
        d.signals = std::move(changed);
    }
    if (curr.mutations.size() > prev.mutations.size()) {
        d.mutations = std::vector<MutationRecord>(curr.mutations.begin() + static_cast<std::ptrdiff_t>(prev.mutations.size()), curr.mutations.end());
    }
    d.events.reserve(events.size());
    for (const auto& e : events) d.events.push_back(normalized_event(e));
    return d;
}

void apply_delta(Snapshot& base, const Delta& d) {
    base.tick = d.tick;
    for (AgentId id : d.removed_agent_ids) {
        std::erase_if(base.agents, [&](const AgentView& a) { return a.id == id; });
    }
    for (const auto& a : d.changed_agents) {
        auto it = std::lower_bound(base.agents.begin(), base.agents.end(), a.id, [](const AgentView& x, AgentId id) { return x.id < id; });
        if (it != base.agents.end() && it->id == a.id) {
            *it = a;
        } else {
            base.agents.insert(it, a);
        }
    }
    if (d.avatar) base.avatar = *d.avatar;
    if (d.tour) base.tour = *d.tour;
    if (d.signals) {
        for (const auto& s : *d.signals) {
            auto it = std::find_if(base.signals.begin(), base.signals.end(), [&](const SignalView& p) { return p.id == s.id; });
            if (it != base.signals.end()) {
                *it = s;
            } else {
                base.signals.push_back(s);
            }
        }
    }
    if (d.mutations) base.mutations.insert(base.mutations.end(), d.mutations->begin(), d.mutations->end());
}

}  // namespace hubsim
