#pragma once

// Live race server. A websocket endpoint carries the JSON client protocol and
// an optional raw TCP endpoint carries device frames. Network handlers run on
// one I/O thread and hand everything to the simulation thread through an
// ordered queue; the simulation thread owns the SessionLoop and the record.

#include <cstdint>
#include <memory>
#include <optional>
#include <string>

#include "dragonboat/session.hpp"

namespace dragonboat {

struct ServerOptions {
    std::string address = "127.0.0.1";
    std::uint16_t port = 8080;                 // 0 picks a free port
    std::optional<std::uint16_t> device_port;  // 0 picks a free port
    bool handle_signals = false;               // stop on SIGINT / SIGTERM
};

class RaceServer {
public:
    RaceServer(SessionConfig config, ServerOptions options);
    ~RaceServer();
    RaceServer(const RaceServer&) = delete;
    RaceServer& operator=(const RaceServer&) = delete;

    /// Binds both endpoints and starts the I/O and simulation threads.
    /// Throws std::runtime_error if a port cannot be bound.
    void start();
    /// Blocks until stop() is called or a handled signal arrives.
    void wait();
    /// Closes the record with a result line and joins the threads.
    void stop();

    std::uint16_t port() const;
    std::optional<std::uint16_t> device_port() const;
    std::uint64_t ticks() const;

    struct Impl;

private:
    std::unique_ptr<Impl> impl_;
};

}  // namespace dragonboat
