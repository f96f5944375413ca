#pragma once

#include <cstdint>
#include <deque>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "hubsim/replay.hpp"
#include "hubsim/wire.hpp"

namespace hubsim {

inline constexpr std::size_t kInputQueueLimit = 8;
inline constexpr std::uint64_t kFullSnapshotInterval = 100;

class SessionClosed : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// One client session driving its own world. Pure message-in/message-out; the
// caller owns timing and transport.
class SessionCore {
public:
    SessionCore(std::shared_ptr<const SimContext> ctx, std::uint64_t seed, std::string session_id);

    // Handles one inbound text frame and returns the encoded replies.
    std::vector<std::string> on_message(std::string_view text);
    // Advances the world one tick. Requires a completed handshake.
    std::vector<std::string> tick();

    bool established() const { return established_; }
    bool closed() const { return closed_; }
    void close() { closed_ = true; }

    const std::string& id() const { return id_; }
    const WorldState& world() const { return world_; }
    std::uint64_t seed() const { return seed_; }
    std::size_t queued() const { return queue_.size(); }
    std::uint64_t dropped() const { return dropped_; }
    std::uint64_t last_acked_tick() const { return last_acked_; }
    const std::vector<InputFrame>& input_log() const { return log_; }
    const std::vector<Checkpoint>& checkpoints() const { return checkpoints_; }

private:
    std::string full_snapshot();

    WorldState world_;
    std::uint64_t seed_;
    std::string id_;
    bool established_ = false;
    bool closed_ = false;
    std::deque<InputFrame> queue_;
    std::uint64_t dropped_ = 0;
    std::uint64_t last_acked_ = 0;
    Snapshot base_;
    std::vector<InputFrame> log_;
    std::vector<Checkpoint> checkpoints_;
};

}  // namespace hubsim
