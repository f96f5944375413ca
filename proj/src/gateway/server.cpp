#include "hubsim/server.hpp"

#include <atomic>
#include <condition_variable>
#include <deque>
#include <filesystem>
#include <fstream>
#include <future>
#include <mutex>
#include <optional>
#include <sstream>
#include <thread>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>

#include "hubsim/session.hpp"

namespace hubsim {

namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
namespace net = boost::asio;
using tcp = net::ip::tcp;

namespace {

constexpr std::size_t kMaxPendingWrites = 4096;

std::string content_type(const std::filesystem::path& p) {
    const auto ext = p.extension().string();
    if (ext == ".html") return "text/html; charset=utf-8";
    if (ext == ".js" || ext == ".mjs") return "text/javascript";
    if (ext == ".css") return "text/css";
    if (ext == ".json") return "application/json";
    if (ext == ".png") return "image/png";
    if (ext == ".svg") return "image/svg+xml";
    return "application/octet-stream";
}

std::optional<std::string> read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) return std::nullopt;
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

class WsConnection;

class SimSession;

struct Server::Impl {
    std::shared_ptr<const SimContext> ctx;
    ServerOptions opt;
    net::io_context sim_ioc{1};
    net::io_context net_ioc{1};
    std::optional<net::executor_work_guard<net::io_context::executor_type>> net_work;
    std::optional<net::executor_work_guard<net::io_context::executor_type>> sim_work;
    tcp::acceptor acceptor{net_ioc};
    net::signal_set signals{net_ioc};
    std::thread net_thread;
    std::thread sim_thread;
    std::atomic<std::uint64_t> latest_tick{0};
    std::atomic<std::size_t> active{0};
    std::atomic<std::uint64_t> next_id{1};
    // Touched only on the simulation thread.
    std::vector<std::weak_ptr<SimSession>> sessions;
    std::mutex stop_mutex;
    std::condition_variable stop_cv;
    bool stop_requested = false;
    bool started = false;
    bool stopped = false;

    void accept();
    void request_stop() {
        std::lock_guard lock(stop_mutex);
        stop_requested = true;
        stop_cv.notify_all();
    }
    http::response<http::string_body> handle(const http::request<http::string_body>& req) const;
};

// World owner. Lives on the simulation thread; talks to its connection only by
// posting encoded frames to the network thread.
class SimSession : public std::enable_shared_from_this<SimSession> {
public:
    SimSession(Server::Impl* srv, std::weak_ptr<WsConnection> conn)
        : srv_(srv), conn_(std::move(conn)), timer_(srv_->sim_ioc) {}

    void init() {
        id_ = "s" + std::to_string(srv_->next_id++);
        core_.emplace(srv_->ctx, srv_->opt.seed, id_);
        ++srv_->active;
        srv_->sessions.push_back(weak_from_this());
    }

    void on_message(const std::string& text) {
        if (finished_ || !core_) return;
        auto out = core_->on_message(text);
        const bool close = core_->closed();
        deliver(std::move(out), close);
        if (close) {
            finish();
        } else if (core_->established() && !ticking_) {
            ticking_ = true;
            next_ = std::chrono::steady_clock::now() + srv_->opt.tick_period;
            arm();
        }
    }

    void finish() {
        if (finished_ || !core_) return;
        finished_ = true;
        timer_.cancel();
        --srv_->active;
        if (!srv_->opt.record_dir.empty()) {
            const std::filesystem::path dir(srv_->opt.record_dir);
            std::filesystem::create_directories(dir);
            std::ofstream log(dir / (id_ + ".input.jsonl"), std::ios::binary);
            write_input_log(log, core_->input_log());
            std::ofstream cps(dir / (id_ + ".checkpoints"), std::ios::binary);
            write_checkpoints(cps, core_->checkpoints());
        }
    }

private:
    void arm() {
        timer_.expires_at(next_);
        timer_.async_wait([self = shared_from_this()](beast::error_code ec) {
            if (ec || self->finished_) return;
            self->on_tick();
        });
    }

    void on_tick() {
        auto out = core_->tick();
        srv_->latest_tick = core_->world().tick;
        deliver(std::move(out), false);
        next_ += srv_->opt.tick_period;
        const auto now = std::chrono::steady_clock::now();
        if (now - next_ > std::chrono::seconds(1)) next_ = now + srv_->opt.tick_period;
        arm();
    }

    void deliver(std::vector<std::string> msgs, bool close);

    Server::Impl* srv_;
    std::weak_ptr<WsConnection> conn_;
    net::steady_timer timer_;
    std::optional<SessionCore> core_;
    std::string id_;
    bool ticking_ = false;
    bool finished_ = false;
    std::chrono::steady_clock::time_point next_;
};

class WsConnection : public std::enable_shared_from_this<WsConnection> {
public:
    WsConnection(tcp::socket socket, Server::Impl* srv) : ws_(std::move(socket)), srv_(srv) {}

    void run(http::request<http::string_body> req) {
        ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
        ws_.async_accept(req, [self = shared_from_this()](beast::error_code ec) {
            if (ec) return;
            self->sim_ = std::make_shared<SimSession>(self->srv_, self->weak_from_this());
            net::post(self->srv_->sim_ioc, [sim = self->sim_] { sim->init(); });
            self->read();
        });
    }

    void send(std::vector<std::string> msgs, bool close_after) {
        if (closing_) return;
        for (auto& m : msgs) out_.push_back(std::move(m));
        if (close_after) closing_ = true;
        if (out_.size() > kMaxPendingWrites) {
            out_.erase(out_.begin() + (writing_ ? 1 : 0), out_.end());
            closing_ = true;
        }
        if (!writing_) write_next();
    }

private:
    void read() {
        ws_.async_read(buf_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
            if (ec) {
                net::post(self->srv_->sim_ioc, [sim = self->sim_] { sim->finish(); });
                return;
            }
            std::string text = beast::buffers_to_string(self->buf_.data());
            self->buf_.consume(self->buf_.size());
            net::post(self->srv_->sim_ioc, [sim = self->sim_, text = std::move(text)] { sim->on_message(text); });
            self->read();
        });
    }

    void write_next() {
        if (out_.empty()) {
            if (closing_ && !close_sent_) {
                close_sent_ = true;
                ws_.async_close(websocket::close_code::normal, [self = shared_from_this()](beast::error_code) {});
            }
            return;
        }
        writing_ = true;
        ws_.text(true);
        ws_.async_write(net::buffer(out_.front()), [self = shared_from_this()](beast::error_code ec, std::size_t) {
            self->writing_ = false;
            if (ec) {
                self->out_.clear();
                return;
            }
            self->out_.pop_front();
            self->write_next();
        });
    }

    websocket::stream<beast::tcp_stream> ws_;
    Server::Impl* srv_;
    std::shared_ptr<SimSession> sim_;
    beast::flat_buffer buf_;
    std::deque<std::string> out_;
    bool writing_ = false;
    bool closing_ = false;
    bool close_sent_ = false;
};

void SimSession::deliver(std::vector<std::string> msgs, bool close) {
    if (msgs.empty() && !close) return;
    net::post(srv_->net_ioc, [conn = conn_, msgs = std::move(msgs), close]() mutable {
        if (auto c = conn.lock()) c->send(std::move(msgs), close);
    });
}

class HttpConnection : public std::enable_shared_from_this<HttpConnection> {
public:
    HttpConnection(tcp::socket socket, Server::Impl* srv) : stream_(std::move(socket)), srv_(srv) {}

    void run() { read(); }

private:
    void read() {
        req_ = {};
        stream_.expires_after(std::chrono::seconds(30));
        http::async_read(stream_, buf_, req_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
            if (ec) {
                self->shutdown();
                return;
            }
            self->on_request();
        });
    }

    void on_request() {
        if (websocket::is_upgrade(req_) && req_.target() == "/session") {
            stream_.expires_never();
            std::make_shared<WsConnection>(stream_.release_socket(), srv_)->run(std::move(req_));
            return;
        }
        auto res = std::make_shared<http::response<http::string_body>>(srv_->handle(req_));
        http::async_write(stream_, *res, [self = shared_from_this(), res](beast::error_code ec, std::size_t) {
            if (ec || !res->keep_alive()) {
                self->shutdown();
                return;
            }
            self->read();
        });
    }

    void shutdown() {
        beast::error_code ec;
        stream_.socket().shutdown(tcp::socket::shutdown_send, ec);
    }

    beast::tcp_stream stream_;
    Server::Impl* srv_;
    beast::flat_buffer buf_;
    http::request<http::string_body> req_;
};

http::response<http::string_body> Server::Impl::handle(const http::request<http::string_body>& req) const {
    auto reply = [&](http::status status, std::string type, std::string body) {
        http::response<http::string_body> res{status, req.version()};
        res.set(http::field::server, "hubsim");
        res.set(http::field::content_type, type);
        res.keep_alive(req.keep_alive());
        res.body() = std::move(body);
        res.prepare_payload();
        return res;
    };
    if (req.method() != http::verb::get && req.method() != http::verb::head) {
        return reply(http::status::method_not_allowed, "text/plain", "method not allowed\n");
    }
    std::string target(req.target());
    if (const auto q = target.find('?'); q != std::string::npos) target.resize(q);
    if (target == "/health") {
        return reply(http::status::ok, "application/json", "{\"ok\":true,\"tick\":" + std::to_string(latest_tick.load()) + "}");
    }
    if (target == "/site") return reply(http::status::ok, "application/json", opt.site_text);
    if (target == "/scenario") return reply(http::status::ok, "application/json", opt.scenario_text);
    if (!opt.static_dir.empty() && !target.empty() && target.front() == '/' && target.find("..") == std::string::npos) {
        std::filesystem::path p = std::filesystem::path(opt.static_dir) / target.substr(1);
        if (target.back() == '/') p /= "index.html";
        if (auto body = read_file(p); body && std::filesystem::is_regular_file(p)) {
            return reply(http::status::ok, content_type(p), std::move(*body));
        }
    }
    return reply(http::status::not_found, "text/plain", "not found\n");
}

void Server::Impl::accept() {
    acceptor.async_accept(net_ioc, [this](beast::error_code ec, tcp::socket socket) {
        if (ec) return;
        std::make_shared<HttpConnection>(std::move(socket), this)->run();
        accept();
    });
}

Server::Server(std::shared_ptr<const SimContext> ctx, ServerOptions options) : impl_(std::make_unique<Impl>()) {
    impl_->ctx = std::move(ctx);
    impl_->opt = std::move(options);
}

Server::~Server() { stop(); }

std::uint16_t Server::start() {
    auto& im = *impl_;
    const tcp::endpoint endpoint(net::ip::make_address(im.opt.address), im.opt.port);
    im.acceptor.open(endpoint.protocol());
    im.acceptor.set_option(net::socket_base::reuse_address(true));
    im.acceptor.bind(endpoint);
    im.acceptor.listen();
    const auto port = im.acceptor.local_endpoint().port();
    im.net_work.emplace(im.net_ioc.get_executor());
    im.sim_work.emplace(im.sim_ioc.get_executor());
    im.accept();
    im.net_thread = std::thread([&im] { im.net_ioc.run(); });
    im.sim_thread = std::thread([&im] { im.sim_ioc.run(); });
    im.started = true;
    return port;
}

void Server::wait() {
    auto& im = *impl_;
    im.signals.add(SIGINT);
    im.signals.add(SIGTERM);
    im.signals.async_wait([&im](beast::error_code ec, int) {
        if (!ec) im.request_stop();
    });
    {
        std::unique_lock lock(im.stop_mutex);
        im.stop_cv.wait(lock, [&] { return im.stop_requested; });
    }
    stop();
}

void Server::stop() {
    auto& im = *impl_;
    if (!im.started || im.stopped) return;
    im.stopped = true;
    im.request_stop();
    std::promise<void> closed;
    net::post(im.net_ioc, [&im] {
        beast::error_code ec;
        im.acceptor.close(ec);
        im.signals.cancel(ec);
    });
    net::post(im.sim_ioc, [&im, &closed] {
        for (auto& w : im.sessions) {
            if (auto s = w.lock()) s->finish();
        }
        closed.set_value();
    });
    closed.get_future().wait();
    im.net_work.reset();
    im.sim_work.reset();
    im.net_ioc.stop();
    im.sim_ioc.stop();
    im.net_thread.join();
    im.sim_thread.join();
}

std::uint64_t Server::latest_tick() const { return impl_->latest_tick.load(); }

std::size_t Server::active_sessions() const { return impl_->active.load(); }

}  // namespace hubsim
