#include "hubsim/session.hpp"

namespace hubsim {

namespace {

std::string error_frame(const std::string& code, const std::string& message) { return encode(ErrorMsg{code, message}); }

}  // namespace

SessionCore::SessionCore(std::shared_ptr<const SimContext> ctx, std::uint64_t seed, std::string session_id)
    : world_(init_world(std::move(ctx), seed)), seed_(seed), id_(std::move(session_id)) {
    base_ = make_snapshot(world_);
    checkpoints_.push_back({world_.tick, state_hash(world_)});
}

std::string SessionCore::full_snapshot() {
    base_ = make_snapshot(world_);
    return encode(base_);
}

std::vector<std::string> SessionCore::on_message(std::string_view text) {
    if (closed_) throw SessionClosed("session " + id_ + " is closed");
    WireMessage msg;
    try {
        msg = decode(text);
    } catch (const DecodeError& e) {
        return {error_frame(e.code(), e.what())};
    }
    std::vector<std::string> out;
    if (const auto* hello = std::get_if<Hello>(&msg)) {
        if (hello->proto != kProtocolVersion) {
            closed_ = true;
            return {error_frame("PROTO", "protocol version " + std::to_string(hello->proto) + " not supported, expected " +
                                             std::to_string(kProtocolVersion))};
        }
        if (established_) return {error_frame("STATE", "session already established")};
        established_ = true;
        const auto& ctx = *world_.ctx;
        out.push_back(encode(Welcome{id_, kTickHz, site_digest(ctx.site), scenario_digest(ctx.scenario)}));
        out.push_back(full_snapshot());
        return out;
    }
    if (const auto* ping = std::get_if<Ping>(&msg)) return {encode(Pong{ping->ts})};
    if (!established_) return {error_frame("STATE", "hello required before other messages")};
    if (const auto* input = std::get_if<InputMsg>(&msg)) {
        if (queue_.size() >= kInputQueueLimit) {
            queue_.pop_front();
            ++dropped_;
            out.push_back(encode(Warning{"INPUT_DROPPED", "input queue full, oldest frame dropped", dropped_}));
        }
        queue_.push_back(input->frame);
        return out;
    }
    if (std::holds_alternative<Resync>(msg)) return {full_snapshot()};
    return {error_frame("UNSUPPORTED", "message type not accepted from clients")};
}

std::vector<std::string> SessionCore::tick() {
    if (closed_) throw SessionClosed("session " + id_ + " is closed");
    if (!established_) throw SessionClosed("session " + id_ + " has no handshake");
    InputFrame frame = neutral_frame(world_.tick);
    if (!queue_.empty()) {
        frame = queue_.front();
        queue_.pop_front();
        last_acked_ = frame.tick;
    }
    frame.tick = world_.tick;
    frame = input_frame_from_line(input_frame_to_line(sanitize(frame)));
    log_.push_back(frame);
    std::vector<Event> events = step(world_, frame);
    if (world_.tick % kCheckpointInterval == 0) checkpoints_.push_back({world_.tick, state_hash(world_)});

    std::vector<std::string> out;
    Snapshot curr = make_snapshot(world_);
    out.push_back(encode(make_delta(base_, curr, std::move(events))));
    base_ = std::move(curr);
    if (world_.tick % kFullSnapshotInterval == 0) out.push_back(encode(base_));
    return out;
}

}  // namespace hubsim
