#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "hubsim/site.hpp"

namespace hubsim {

enum class SignalColor { green = 0, yellow = 1, red = 2 };

std::string_view to_string(SignalColor c);

struct SignalPhase {
    SignalColor color = SignalColor::green;
    double duration = 0.0;
};

struct SignalPlan {
    std::vector<SignalPhase> phases;
    double offset = 0.0;

    double cycle() const;
};

class SignalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Signal plans for every signal_head, keyed by head id.
struct SignalProgram {
    std::map<std::string, SignalPlan> heads;
};

// Parses and checks one plan (durations > 0, exactly one green, exactly one red).
SignalPlan parse_signal_plan(const nlohmann::json& j);
SignalProgram signal_program_from_site(const SiteMap& site);

/// Colour at `t` seconds; throws SignalError for an unknown head.
SignalColor signal_state(const SignalProgram& program, const std::string& head, double t);
SignalColor plan_color(const SignalPlan& plan, double t);

}  // namespace hubsim
