#pragma once

#include <cstdint>
#include <istream>
#include <memory>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "hubsim/world.hpp"

namespace hubsim {

inline constexpr std::uint64_t kCheckpointInterval = 100;

class ReplayFormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Checkpoint {
    std::uint64_t tick = 0;
    std::uint64_t hash = 0;
    bool operator==(const Checkpoint&) const = default;
};

std::string input_frame_to_line(const InputFrame& f);
InputFrame input_frame_from_line(const std::string& line);

// Input logs: one JSON frame per line. run_replay requires ticks contiguous from 0.
std::vector<InputFrame> read_input_log(std::istream& in);
std::vector<InputFrame> read_input_log_file(const std::string& path);
void write_input_log(std::ostream& out, const std::vector<InputFrame>& frames);

// Checkpoints: "tick<TAB>16 hex digits" per line, ticks strictly increasing.
std::vector<Checkpoint> read_checkpoints(std::istream& in);
std::vector<Checkpoint> read_checkpoints_file(const std::string& path);
std::string checkpoint_line(const Checkpoint& c);
void write_checkpoints(std::ostream& out, const std::vector<Checkpoint>& checkpoints);

class LogGap : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct ReplayResult {
    bool pass = true;
    std::uint64_t tick = 0;
    std::uint64_t expected = 0;
    std::uint64_t actual = 0;
};

/// Steps a fresh world through the log comparing hashes at each checkpoint.
/// Throws LogGap when a frame's tick is out of sequence, or a checkpoint lies
/// beyond the log.
ReplayResult run_replay(std::shared_ptr<const SimContext> ctx, std::uint64_t seed, const std::vector<InputFrame>& log,
                        const std::vector<Checkpoint>& checkpoints);

}  // namespace hubsim
