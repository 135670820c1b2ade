#pragma once

// Single-client session server. Accepts one connection at a time; the first
// bytes decide the transport ("GET " starts a WebSocket upgrade, anything
// else is length-prefixed TCP). Each connection gets a fresh session.

#include "continuum/protocol.hpp"
#include "continuum/scene.hpp"

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>

namespace continuum {

class BindError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct ServerOptions {
    std::string host = "127.0.0.1";
    std::uint16_t port = 8765; // 0 picks an ephemeral port
    // Lockstep advances one tick per input message; otherwise the server
    // ticks at kTickRate and applies the most recent held keys.
    bool lockstep = false;
    std::optional<std::filesystem::path> record_inputs;
    // Stop after this many connections have been served (tests).
    std::optional<int> max_connections;
    std::uint64_t seed = 0;
};

class SessionServer {
public:
    SessionServer(Scene scene, ServerOptions options);
    ~SessionServer();
    SessionServer(const SessionServer&) = delete;
    SessionServer& operator=(const SessionServer&) = delete;

    // Throws BindError when the address cannot be bound.
    void bind();
    std::uint16_t port() const { return port_; }
    // Blocks serving connections until stop() or max_connections.
    void run();
    void stop() { stopping_ = true; }

private:
    Scene scene_;
    ServerOptions options_;
    int listen_fd_ = -1;
    std::uint16_t port_ = 0;
    std::atomic<bool> stopping_{false};

    void serve(int fd);
};

} // namespace continuum
