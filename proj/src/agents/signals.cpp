#include "hubsim/signals.hpp"

#include <cmath>

namespace hubsim {

std::string_view to_string(SignalColor c) {
    switch (c) {
    case SignalColor::green: return "green";
    case SignalColor::yellow: return "yellow";
    case SignalColor::red: return "red";
    }
    return "?";
}

double SignalPlan::cycle() const {
    double total = 0.0;
    for (const auto& p : phases) total += p.duration;
    return total;
}

SignalPlan parse_signal_plan(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("phases") || !j["phases"].is_array()) {
        throw SignalError("signal program needs a 'phases' array");
    }
    SignalPlan plan;
    plan.offset = j.value("offset", 0.0);
    int greens = 0;
    int reds = 0;
    for (const auto& ph : j["phases"]) {
        if (!ph.is_array() || ph.size() != 2 || !ph[0].is_string() || !ph[1].is_number()) {
            throw SignalError("signal phase must be [color, duration]");
        }
        SignalPhase phase;
        const auto color = ph[0].get<std::string>();
        if (color == "green") {
            phase.color = SignalColor::green;
            ++greens;
        } else if (color == "yellow") {
            phase.color = SignalColor::yellow;
        } else if (color == "red") {
            phase.color = SignalColor::red;
            ++reds;
        } else {
            throw SignalError("unknown signal color '" + color + "'");
        }
        phase.duration = ph[1].get<double>();
        if (!(phase.duration > 0.0)) throw SignalError("signal phase duration must be positive");
        plan.phases.push_back(phase);
    }
    if (greens != 1 || reds != 1) throw SignalError("signal program needs exactly one green and one red phase");
    return plan;
}

SignalProgram signal_program_from_site(const SiteMap& site) {
    SignalProgram program;
    for (const Feature* f : site.of_kind(FeatureKind::signal_head)) {
        if (!f->props.contains("program")) throw SignalError("signal_head '" + f->id + "' has no program");
        try {
            program.heads[f->id] = parse_signal_plan(f->props["program"]);
        } catch (const SignalError& e) {
            throw SignalError("signal_head '" + f->id + "': " + e.what());
        }
    }
    return program;
}

SignalColor plan_color(const SignalPlan& plan, double t) {
    const double cycle = plan.cycle();
    double local = std::fmod(t + plan.offset, cycle);
    if (local < 0.0) local += cycle;
    // A boundary instant belongs to the later phase, despite fmod rounding.
    constexpr double kEps = 1e-9;
    double start = 0.0;
    for (const auto& phase : plan.phases) {
        if (local + kEps < start + phase.duration) return phase.color;
        start += phase.duration;
    }
    return plan.phases.front().color;
}

SignalColor signal_state(const SignalProgram& program, const std::string& head, double t) {
    auto it = program.heads.find(head);
    if (it == program.heads.end()) throw SignalError("UnknownHead: " + head);
    return plan_color(it->second, t);
}

}  // namespace hubsim
