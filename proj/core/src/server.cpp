#include "continuum/server.hpp"

#include "continuum/errors.hpp"
#include "continuum/session.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <vector>

namespace continuum {

namespace {

using Clock = std::chrono::steady_clock;

class Connection {
public:
    explicit Connection(int fd) : fd_(fd) {}

    bool open() const { return open_; }

    // Waits up to timeout_ms for data and returns every complete message.
    std::vector<std::string> receive(int timeout_ms) {
        std::vector<std::string> out;
        pollfd p{fd_, POLLIN, 0};
        const int ready = ::poll(&p, 1, timeout_ms);
        if (ready <= 0) return out;
        char buf[65536];
        const ssize_t n = ::recv(fd_, buf, sizeof buf, 0);
        if (n <= 0) {
            open_ = false;
            return out;
        }
        ingest(std::string_view(buf, static_cast<std::size_t>(n)), out);
        return out;
    }

    void send(std::string_view message) {
        if (!open_) return;
        if (transport_ == Transport::websocket) {
            write_all(websocket_frame(WsOpcode::text, message));
        } else {
            write_all(length_prefixed(message));
        }
    }

    void close() { open_ = false; }

private:
    enum class Transport { unknown, tcp, websocket };

    int fd_;
    bool open_ = true;
    Transport transport_ = Transport::unknown;
    std::string pending_;
    LengthPrefixDecoder tcp_;
    WebSocketDecoder ws_{true};

    void write_all(const std::string& bytes) {
        std::size_t sent = 0;
        while (sent < bytes.size()) {
            const ssize_t n = ::send(fd_, bytes.data() + sent, bytes.size() - sent, MSG_NOSIGNAL);
            if (n < 0 && errno == EINTR) continue;
            if (n <= 0) {
                open_ = false;
                return;
            }
            sent += static_cast<std::size_t>(n);
        }
    }

    void ingest(std::string_view bytes, std::vector<std::string>& out) {
        if (transport_ == Transport::unknown) {
            pending_.append(bytes);
            if (pending_.size() < 4) return;
            if (pending_.compare(0, 4, "GET ") != 0) {
                transport_ = Transport::tcp;
                tcp_.feed(pending_);
                pending_.clear();
            } else {
                std::size_t consumed = 0;
                const auto request = parse_http_request(pending_, &consumed);
                if (!request) return;
                write_all(websocket_handshake_response(*request));
                transport_ = Transport::websocket;
                ws_.feed(std::string_view(pending_).substr(consumed));
                pending_.clear();
            }
        } else if (transport_ == Transport::tcp) {
            tcp_.feed(bytes);
        } else {
            ws_.feed(bytes);
        }
        if (transport_ == Transport::tcp) {
            while (auto m = tcp_.next()) out.push_back(std::move(*m));
        } else if (transport_ == Transport::websocket) {
            while (auto m = ws_.next()) {
                switch (m->opcode) {
                case WsOpcode::text:
                case WsOpcode::binary: out.push_back(std::move(m->payload)); break;
                case WsOpcode::ping: write_all(websocket_frame(WsOpcode::pong, m->payload)); break;
                case WsOpcode::close:
                    write_all(websocket_frame(WsOpcode::close, {}));
                    open_ = false;
                    return;
                default: break;
                }
            }
        }
    }
};

} // namespace

SessionServer::SessionServer(Scene scene, ServerOptions options)
    : scene_(std::move(scene)), options_(std::move(options)) {}

SessionServer::~SessionServer() {
    if (listen_fd_ >= 0) ::close(listen_fd_);
}

void SessionServer::bind() {
    listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
    if (listen_fd_ < 0) throw BindError(std::string("socket: ") + std::strerror(errno));
    const int yes = 1;
    ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof yes);
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(options_.port);
    if (::inet_pton(AF_INET, options_.host.c_str(), &addr.sin_addr) != 1) {
        throw BindError("invalid listen address '" + options_.host + "'");
    }
    if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0 || ::listen(listen_fd_, 4) != 0) {
        const std::string reason = std::strerror(errno);
        ::close(listen_fd_);
        listen_fd_ = -1;
        throw BindError("cannot listen on " + options_.host + ":" + std::to_string(options_.port) + ": " + reason);
    }
    socklen_t len = sizeof addr;
    ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&addr), &len);
    port_ = ntohs(addr.sin_port);
}

void SessionServer::run() {
    if (listen_fd_ < 0) bind();
    int served = 0;
    while (!stopping_) {
        if (options_.max_connections && served >= *options_.max_connections) break;
        pollfd p{listen_fd_, POLLIN, 0};
        if (::poll(&p, 1, 100) <= 0) continue;
        const int fd = ::accept(listen_fd_, nullptr, nullptr);
        if (fd < 0) continue;
        const int yes = 1;
        ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &yes, sizeof yes);
        try {
            serve(fd);
        } catch (const std::exception& e) {
            std::fprintf(stderr, "continuum: connection dropped: %s\n", e.what());
        }
        ::close(fd);
        ++served;
    }
}

void SessionServer::serve(int fd) {
    Connection conn(fd);
    SessionState state = start_session(scene_, options_.seed);
    std::ofstream record;
    if (options_.record_inputs) record.open(*options_.record_inputs, std::ios::trunc);

    bool greeted = false;
    InputFrame pending;
    const auto period = std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(kTickDt));
    auto next_tick = Clock::now() + period;

    const auto step = [&](InputFrame input) {
        input.tick = state.tick + 1;
        if (record.is_open()) record << encode_input(input) << '\n' << std::flush;
        const Frame frame = advance(state, input, kTickDt);
        conn.send(encode_frame(frame));
    };

    while (conn.open() && !stopping_) {
        int timeout = 100;
        if (greeted && !options_.lockstep) {
            const auto wait = std::chrono::duration_cast<std::chrono::milliseconds>(next_tick - Clock::now()).count();
            timeout = static_cast<int>(std::max<long long>(0, wait));
        }
        std::vector<std::string> messages;
        try {
            messages = conn.receive(timeout);
        } catch (const ParseError& e) {
            conn.send(encode_error(e.what()));
            conn.close();
            break;
        }
        for (const std::string& text : messages) {
            ClientMessage msg;
            try {
                msg = decode_client_message(text);
            } catch (const ParseError& e) {
                conn.send(encode_error(e.what()));
                continue;
            }
            if (msg.kind == ClientMessageKind::hello) {
                if (msg.version != kProtocolVersion) {
                    conn.send(encode_error("unsupported protocol version " + std::to_string(msg.version)));
                    conn.close();
                    break;
                }
                greeted = true;
                conn.send(encode_config(scene_));
                next_tick = Clock::now() + period;
                continue;
            }
            if (!greeted) {
                conn.send(encode_error("hello required before input"));
                continue;
            }
            if (options_.lockstep) {
                step(msg.input);
            } else {
                pending.keys = msg.input.keys;
                pending.mouse_dx += msg.input.mouse_dx;
                pending.mouse_dy += msg.input.mouse_dy;
                pending.actions.insert(pending.actions.end(), msg.input.actions.begin(), msg.input.actions.end());
            }
        }
        if (greeted && !options_.lockstep && Clock::now() >= next_tick) {
            step(pending);
            pending.mouse_dx = pending.mouse_dy = 0.0;
            pending.actions.clear();
            next_tick += period;
            if (Clock::now() > next_tick + 10 * period) next_tick = Clock::now() + period;
        }
    }
}

} // namespace continuum
