#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <string>

#include "hubsim/world.hpp"

namespace hubsim {

struct ServerOptions {
    std::string address = "127.0.0.1";
    std::uint16_t port = 8080;
    std::uint64_t seed = 0;
    // Exact file contents served on /site and /scenario.
    std::string site_text;
    std::string scenario_text;
    // Directory for static assets served under /; empty disables them.
    std::string static_dir;
    // When set, each closed session writes <dir>/<id>.input.jsonl and <dir>/<id>.checkpoints.
    std::string record_dir;
    std::chrono::milliseconds tick_period{50};
};

// WebSocket and HTTP gateway. Network I/O and world stepping run on two
// separate threads; sessions exchange inputs and encoded frames by posting.
class Server {
public:
    Server(std::shared_ptr<const SimContext> ctx, ServerOptions options);
    ~Server();
    Server(const Server&) = delete;
    Server& operator=(const Server&) = delete;

    // Binds and starts serving; returns the bound port.
    std::uint16_t start();
    void stop();
    // Blocks until stop() is called from another thread or a signal.
    void wait();

    std::uint64_t latest_tick() const;
    std::size_t active_sessions() const;

    struct Impl;

private:
    std::unique_ptr<Impl> impl_;
};

}  // namespace hubsim
