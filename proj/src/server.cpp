#include "dragonboat/server.hpp"

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <deque>
#include <fstream>
#include <mutex>
#include <thread>
#include <variant>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>

#include "dragonboat/log.hpp"

namespace dragonboat {

namespace asio = boost::asio;
namespace beast = boost::beast;
namespace websocket = beast::websocket;
using tcp = asio::ip::tcp;

namespace {

struct Disconnect {};
using DeviceBytes = std::vector<std::uint8_t>;
using Inbound = std::variant<ClientMessage, Disconnect, DeviceBytes>;

class Inbox {
public:
    void push(Inbound in) {
        std::lock_guard lock(mu_);
        items_.push_back(std::move(in));
    }
    std::deque<Inbound> drain() {
        std::lock_guard lock(mu_);
        return std::exchange(items_, {});
    }

private:
    std::mutex mu_;
    std::deque<Inbound> items_;
};

// Outgoing state messages beyond this backlog are dropped for a slow client.
constexpr std::size_t max_backlog = 256;

}  // namespace

class ClientConn;
class DeviceConn;

struct RaceServer::Impl {
    SessionConfig config;
    ServerOptions options;
    asio::io_context ioc;
    tcp::acceptor ws_acceptor{ioc};
    std::optional<tcp::acceptor> dev_acceptor;
    asio::signal_set signals{ioc};
    std::shared_ptr<ClientConn> client;
    std::shared_ptr<DeviceConn> device;
    Inbox inbox;
    std::optional<SessionLoop> loop;

    std::thread io_thread, sim_thread;
    std::atomic<bool> running{false};
    std::atomic<std::uint64_t> ticks{0};
    std::mutex stop_mu;
    std::condition_variable stop_cv;
    bool stop_requested = false;
    bool started = false;
    std::uint16_t bound_port = 0;
    std::optional<std::uint16_t> bound_device_port;

    Impl(SessionConfig c, ServerOptions o) : config(std::move(c)), options(std::move(o)) {}

    void request_stop() {
        std::lock_guard lock(stop_mu);
        stop_requested = true;
        stop_cv.notify_all();
    }

    void accept_client();
    void accept_device();
    void on_client_text(const std::string& text, const std::shared_ptr<ClientConn>& from);
    void on_client_closed(const ClientConn* c);
    void on_device_closed(const DeviceConn* d);
    void broadcast(std::string text);
    void send_device(std::vector<std::uint8_t> bytes);
    void run_simulation();
};

class ClientConn : public std::enable_shared_from_this<ClientConn> {
public:
    ClientConn(tcp::socket socket, RaceServer::Impl& server) : ws_(std::move(socket)), server_(server) {}

    void start(std::string hello) {
        ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
        ws_.async_accept([self = shared_from_this(), hello = std::move(hello)](beast::error_code ec) mutable {
            if (ec) return self->closed();
            self->open_ = true;
            self->send(std::move(hello));
            self->read();
        });
    }

    void send(std::string text) {
        if (closed_) return;
        if (queue_.size() >= max_backlog) {
            log::debug("client backlog full, dropping a message");
            return;
        }
        queue_.push_back(std::move(text));
        if (open_ && queue_.size() == 1) write();
    }

    void close() {
        if (closed_) return;
        closed_ = true;
        beast::error_code ec;
        ws_.next_layer().shutdown(tcp::socket::shutdown_both, ec);
        ws_.next_layer().close(ec);
    }

private:
    void read() {
        ws_.async_read(buffer_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
            if (ec) return self->closed();
            std::string text = beast::buffers_to_string(self->buffer_.data());
            self->buffer_.consume(self->buffer_.size());
            self->server_.on_client_text(text, self);
            self->read();
        });
    }

    void write() {
        ws_.text(true);
        ws_.async_write(asio::buffer(queue_.front()), [self = shared_from_this()](beast::error_code ec, std::size_t) {
            if (ec) return self->closed();
            self->queue_.pop_front();
            if (!self->queue_.empty()) self->write();
        });
    }

    void closed() {
        if (reported_) return;
        reported_ = true;
        closed_ = true;
        server_.on_client_closed(this);
    }

    websocket::stream<tcp::socket> ws_;
    RaceServer::Impl& server_;
    beast::flat_buffer buffer_;
    std::deque<std::string> queue_;
    bool open_ = false;
    bool closed_ = false;
    bool reported_ = false;
};

class DeviceConn : public std::enable_shared_from_this<DeviceConn> {
public:
    DeviceConn(tcp::socket socket, RaceServer::Impl& server) : socket_(std::move(socket)), server_(server) {}

    void start() { read(); }

    void send(std::vector<std::uint8_t> bytes) {
        queue_.push_back(std::move(bytes));
        if (queue_.size() == 1) write();
    }

    void close() {
        beast::error_code ec;
        socket_.shutdown(tcp::socket::shutdown_both, ec);
        socket_.close(ec);
    }

private:
    void read() {
        socket_.async_read_some(asio::buffer(buf_), [self = shared_from_this()](beast::error_code ec, std::size_t n) {
            if (ec) return self->server_.on_device_closed(self.get());
            self->server_.inbox.push(DeviceBytes(self->buf_.begin(), self->buf_.begin() + static_cast<std::ptrdiff_t>(n)));
            self->read();
        });
    }

    void write() {
        asio::async_write(socket_, asio::buffer(queue_.front()), [self = shared_from_this()](beast::error_code ec, std::size_t) {
            if (ec) return self->server_.on_device_closed(self.get());
            self->queue_.pop_front();
            if (!self->queue_.empty()) self->write();
        });
    }

    tcp::socket socket_;
    RaceServer::Impl& server_;
    std::array<std::uint8_t, 512> buf_{};
    std::deque<std::vector<std::uint8_t>> queue_;
};

void RaceServer::Impl::accept_client() {
    ws_acceptor.async_accept([this](beast::error_code ec, tcp::socket socket) {
        if (ec) return;
        if (client) {
            log::warn("rejecting a second control client");
            beast::error_code ignored;
            socket.close(ignored);
        } else {
            log::info("control client connected");
            client = std::make_shared<ClientConn>(std::move(socket), *this);
            json hello = config;
            client->start(hello.dump());
        }
        accept_client();
    });
}

void RaceServer::Impl::accept_device() {
    dev_acceptor->async_accept([this](beast::error_code ec, tcp::socket socket) {
        if (ec) return;
        if (device) {
            log::warn("rejecting a second device connection");
            beast::error_code ignored;
            socket.close(ignored);
        } else {
            log::info("device connected");
            device = std::make_shared<DeviceConn>(std::move(socket), *this);
            device->start();
        }
        accept_device();
    });
}

void RaceServer::Impl::on_client_text(const std::string& text, const std::shared_ptr<ClientConn>& from) {
    try {
        inbox.push(parse_client_message(json::parse(text)));
    } catch (const std::exception& e) {
        log::warn("bad client message: {}", e.what());
        from->send(json{{"type", "error"}, {"message", e.what()}}.dump());
    }
}

void RaceServer::Impl::on_client_closed(const ClientConn* c) {
    if (client.get() != c) return;
    log::info("control client disconnected");
    client->close();
    client.reset();
    inbox.push(Disconnect{});
}

void RaceServer::Impl::on_device_closed(const DeviceConn* d) {
    if (device.get() != d) return;
    log::info("device disconnected");
    device->close();
    device.reset();
}

void RaceServer::Impl::broadcast(std::string text) {
    asio::post(ioc, [this, text = std::move(text)]() mutable {
        if (client) client->send(std::move(text));
    });
}

void RaceServer::Impl::send_device(std::vector<std::uint8_t> bytes) {
    asio::post(ioc, [this, bytes = std::move(bytes)]() mutable {
        if (device) device->send(std::move(bytes));
    });
}

void RaceServer::Impl::run_simulation() {
    SessionLoop& l = *loop;
    std::ofstream file;
    std::optional<RecordWriter> record;
    if (!config.record_path.empty()) {
        file.open(config.record_path);
        if (!file) log::error("cannot open record file {}", config.record_path);
        else {
            record.emplace(file);
            record->write_config(config, {});
            file.flush();
        }
    }

    SessionResult summary;
    bool record_open = record.has_value();
    auto close_record = [&] {
        if (!record_open) return;
        record_open = false;
        summary.session = l.session();
        summary.ticks = l.ticks();
        summary.collisions = l.collisions();
        summary.final_boat = l.boat();
        try {
            add_physiology(config, summary);
        } catch (const std::exception& e) {
            log::warn("physiology skipped: {}", e.what());
        }
        record->write_result(summary);
        file.flush();
    };
    auto announce = [&] {
        for (RaceEvent e : l.drain_events()) {
            broadcast(json{{"type", "phase"}, {"value", to_string(l.session().phase)}, {"event", to_string(e)}}.dump());
            if (e == RaceEvent::finish_crossed) {
                broadcast(json{{"type", "result"}, {"completion_time", *l.session().completion_time}}.dump());
                close_record();
            }
        }
    };

    using clock = std::chrono::steady_clock;
    const auto period = std::chrono::duration_cast<clock::duration>(std::chrono::duration<double>(config.hydro.dt));
    auto next = clock::now();
    while (running.load()) {
        for (Inbound& in : inbox.drain()) {
            if (auto* m = std::get_if<ClientMessage>(&in)) {
                std::visit([&](auto& v) { v.t = l.time(); }, *m);
                if (l.apply(*m)) {
                    if (record_open) record->write_message(*m);
                } else {
                    broadcast(json{{"type", "error"}, {"message", "message rejected in phase " +
                                                                      std::string(to_string(l.session().phase))}}
                                  .dump());
                }
            } else if (std::holds_alternative<Disconnect>(in)) {
                const ClientMessage release = InputMessage{std::nullopt, 0.0, 0.0, l.time()};
                l.apply(release);
                if (record_open) record->write_message(release);
            } else {
                l.feed_device(std::get<DeviceBytes>(in));
            }
        }
        announce();
        if (auto snap = l.tick()) {
            broadcast(to_json(*snap).dump());
            if (record_open) {
                record->write_snapshot(*snap);
                summary.snapshots.push_back(*snap);
            }
        }
        announce();
        if (auto out = l.take_device_output(); !out.empty()) send_device(std::move(out));
        ticks.store(l.ticks());

        next += period;
        const auto now = clock::now();
        if (now - next > std::chrono::milliseconds(250)) {
            log::warn("simulation loop fell behind real time; resynchronising");
            next = now;
        }
        std::this_thread::sleep_until(next);
    }
    close_record();
}

RaceServer::RaceServer(SessionConfig config, ServerOptions options)
    : impl_(std::make_unique<Impl>(std::move(config), std::move(options))) {}

RaceServer::~RaceServer() { stop(); }

namespace {

void listen_on(tcp::acceptor& a, const std::string& address, std::uint16_t port) {
    const tcp::endpoint ep(asio::ip::make_address(address), port);
    a.open(ep.protocol());
    a.set_option(asio::socket_base::reuse_address(true));
    a.bind(ep);
    a.listen();
}

}  // namespace

void RaceServer::start() {
    Impl& s = *impl_;
    if (s.started) throw std::logic_error("server already started");
    if (s.options.device_port && s.config.input_source != InputSource::device_stream) {
        log::info("device port given: switching input source to device_stream");
        s.config.input_source = InputSource::device_stream;
    }
    s.loop.emplace(s.config);
    try {
        listen_on(s.ws_acceptor, s.options.address, s.options.port);
        s.bound_port = s.ws_acceptor.local_endpoint().port();
        if (s.options.device_port) {
            s.dev_acceptor.emplace(s.ioc);
            listen_on(*s.dev_acceptor, s.options.address, *s.options.device_port);
            s.bound_device_port = s.dev_acceptor->local_endpoint().port();
        }
    } catch (const boost::system::system_error& e) {
        throw std::runtime_error(std::string("cannot listen: ") + e.what());
    }
    s.accept_client();
    if (s.dev_acceptor) s.accept_device();
    if (s.options.handle_signals) {
        s.signals.add(SIGINT);
        s.signals.add(SIGTERM);
        s.signals.async_wait([&s](beast::error_code ec, int) {
            if (!ec) s.request_stop();
        });
    }
    s.started = true;
    s.running = true;
    s.io_thread = std::thread([&s] { s.ioc.run(); });
    s.sim_thread = std::thread([&s] { s.run_simulation(); });
}

void RaceServer::wait() {
    Impl& s = *impl_;
    std::unique_lock lock(s.stop_mu);
    s.stop_cv.wait(lock, [&s] { return s.stop_requested; });
}

void RaceServer::stop() {
    Impl& s = *impl_;
    if (!s.started) return;
    s.started = false;
    s.running = false;
    if (s.sim_thread.joinable()) s.sim_thread.join();
    asio::post(s.ioc, [&s] {
        beast::error_code ec;
        s.ws_acceptor.close(ec);
        if (s.dev_acceptor) s.dev_acceptor->close(ec);
        s.signals.cancel(ec);
        if (s.client) s.client->close();
        if (s.device) s.device->close();
        s.client.reset();
        s.device.reset();
    });
    if (s.io_thread.joinable()) s.io_thread.join();
    s.request_stop();
}

std::uint16_t RaceServer::port() const { return impl_->bound_port; }
std::optional<std::uint16_t> RaceServer::device_port() const { return impl_->bound_device_port; }
std::uint64_t RaceServer::ticks() const { return impl_->ticks.load(); }

}  // namespace dragonboat
