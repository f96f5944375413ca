#include "hubsim/events.hpp"

#include <stdexcept>

#include "hubsim/hash.hpp"

namespace hubsim {

namespace {

constexpr std::string_view kEventNames[] = {"BarrierApproached", "BarrierResolved", "TourCompleted",  "ParticleCue", "AgentSpawned",
                                            "AgentDespawned",    "TransitArrived",  "TransitDeparted", "LaneChange"};

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

AgentKind kind_field(const nlohmann::json& j) {
    const auto k = agent_kind_from_string(j.at("agent_kind").get<std::string>());
    if (!k) throw std::runtime_error("unknown agent_kind");
    return *k;
}

}  // namespace

std::string_view to_string(AgentKind k) {
    switch (k) {
    case AgentKind::vehicle: return "vehicle";
    case AgentKind::pedestrian: return "pedestrian";
    case AgentKind::tram: return "tram";
    }
    return "?";
}

std::optional<AgentKind> agent_kind_from_string(std::string_view s) {
    if (s == "vehicle") return AgentKind::vehicle;
    if (s == "pedestrian") return AgentKind::pedestrian;
    if (s == "tram") return AgentKind::tram;
    return std::nullopt;
}

std::string_view to_string(EventKind k) { return kEventNames[static_cast<std::size_t>(k)]; }

nlohmann::ordered_json event_to_json(const Event& e) {
    nlohmann::ordered_json j;
    j["tick"] = e.tick;
    j["kind"] = std::string(to_string(e.kind()));
    j["phase"] = e.phase;
    j["subject"] = e.subject;
    std::visit(overloaded{
                   [&](const BarrierApproached& p) {
                       j["barrier"] = p.barrier_id;
                       j["barrier_index"] = p.barrier_index;
                       if (p.info_text) j["info_text"] = *p.info_text;
                   },
                   [&](const BarrierResolved& p) {
                       j["barrier"] = p.barrier_id;
                       j["barrier_index"] = p.barrier_index;
                       j["mutation"] = p.mutation;
                   },
                   [&](const TourCompleted& p) { j["barriers"] = p.barriers; },
                   [&](const ParticleCue& p) {
                       j["barrier"] = p.barrier_id;
                       j["barrier_index"] = p.barrier_index;
                       j["level"] = p.level;
                       j["anchor"] = {quantized(p.anchor.x), quantized(p.anchor.y)};
                   },
                   [&](const AgentSpawned& p) {
                       j["agent_id"] = p.agent_id;
                       j["agent_kind"] = std::string(to_string(p.agent_kind));
                       j["archetype"] = p.archetype;
                       j["source"] = p.source;
                   },
                   [&](const AgentDespawned& p) {
                       j["agent_id"] = p.agent_id;
                       j["agent_kind"] = std::string(to_string(p.agent_kind));
                       j["reason"] = p.reason;
                   },
                   [&](const TransitArrived& p) {
                       j["agent_id"] = p.agent_id;
                       j["line"] = p.line_id;
                       j["stop"] = p.stop_id;
                   },
                   [&](const TransitDeparted& p) {
                       j["agent_id"] = p.agent_id;
                       j["line"] = p.line_id;
                       j["stop"] = p.stop_id;
                   },
                   [&](const LaneChange& p) {
                       j["agent_id"] = p.agent_id;
                       j["from_lane"] = p.from_lane;
                       j["to_lane"] = p.to_lane;
                       j["front_gap"] = quantized(p.front_gap);
                       j["rear_gap"] = quantized(p.rear_gap);
                       j["speed"] = quantized(p.speed);
                       j["follower_speed"] = quantized(p.follower_speed);
                   },
               },
               e.payload);
    return j;
}

Event event_from_json(const nlohmann::json& j) {
    Event e;
    try {
        e.tick = j.at("tick").get<std::uint64_t>();
        e.phase = j.at("phase").get<int>();
        e.subject = j.at("subject").get<std::uint64_t>();
        const auto kind = j.at("kind").get<std::string>();
        if (kind == "BarrierApproached") {
            BarrierApproached p{j.at("barrier").get<std::string>(), j.at("barrier_index").get<std::size_t>(), std::nullopt};
            if (j.contains("info_text")) p.info_text = j["info_text"].get<std::string>();
            e.payload = p;
        } else if (kind == "BarrierResolved") {
            e.payload = BarrierResolved{j.at("barrier").get<std::string>(), j.at("barrier_index").get<std::size_t>(),
                                        j.at("mutation").get<std::string>()};
        } else if (kind == "TourCompleted") {
            e.payload = TourCompleted{j.at("barriers").get<std::size_t>()};
        } else if (kind == "ParticleCue") {
            const auto& a = j.at("anchor");
            e.payload = ParticleCue{j.at("barrier").get<std::string>(), j.at("barrier_index").get<std::size_t>(), j.at("level").get<int>(),
                                    Vec2{a.at(0).get<double>(), a.at(1).get<double>()}};
        } else if (kind == "AgentSpawned") {
            e.payload = AgentSpawned{j.at("agent_id").get<AgentId>(), kind_field(j), j.at("archetype").get<std::size_t>(),
                                     j.at("source").get<std::string>()};
        } else if (kind == "AgentDespawned") {
            e.payload = AgentDespawned{j.at("agent_id").get<AgentId>(), kind_field(j), j.at("reason").get<std::string>()};
        } else if (kind == "TransitArrived") {
            e.payload = TransitArrived{j.at("agent_id").get<AgentId>(), j.at("line").get<std::string>(), j.at("stop").get<std::string>()};
        } else if (kind == "TransitDeparted") {
            e.payload = TransitDeparted{j.at("agent_id").get<AgentId>(), j.at("line").get<std::string>(), j.at("stop").get<std::string>()};
        } else if (kind == "LaneChange") {
            e.payload = LaneChange{j.at("agent_id").get<AgentId>(),   j.at("from_lane").get<std::string>(),
                                   j.at("to_lane").get<std::string>(), j.at("front_gap").get<double>(),
                                   j.at("rear_gap").get<double>(),     j.at("speed").get<double>(),
                                   j.at("follower_speed").get<double>()};
        } else {
            throw std::runtime_error("unknown event kind '" + kind + "'");
        }
    } catch (const nlohmann::json::exception& ex) {
        throw std::runtime_error(std::string("malformed event: ") + ex.what());
    }
    return e;
}

}  // namespace hubsim
