#include "continuum/errors.hpp"
#include "continuum/server.hpp"

#include <gtest/gtest.h>

#include "json.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <thread>

using namespace continuum;
using nlohmann::json;

namespace {

Scene small_scene() {
    return load_scene(R"({"continuum_scene": 1, "name": "server-test", "gravity": [0, 0, 0, 0],
        "player_spawn": {"position": [0, 1, 0, 0]},
        "nodes": [{"id": 1, "geometry": {"kind": "tetra4", "primitive": "tesseract", "size": 1},
                   "transform": {"translation": [0, 1, 4, 0]}}]})");
}

// Runs a server on an ephemeral port in a background thread.
class ServerFixture {
public:
    explicit ServerFixture(ServerOptions options) {
        options.port = 0;
        server_ = std::make_unique<SessionServer>(small_scene(), options);
        server_->bind();
        thread_ = std::thread([this] { server_->run(); });
    }
    ~ServerFixture() {
        server_->stop();
        thread_.join();
    }
    std::uint16_t port() const { return server_->port(); }

private:
    std::unique_ptr<SessionServer> server_;
    std::thread thread_;
};

class Client {
public:
    Client(std::uint16_t port, bool websocket = false) : websocket_(websocket) {
        fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
        sockaddr_in addr{};
        addr.sin_family = AF_INET;
        addr.sin_port = htons(port);
        ::inet_pton(AF_INET, "127.0.0.1", &addr.sin_addr);
        connected_ = ::connect(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) == 0;
        if (connected_ && websocket_) handshake();
    }
    ~Client() { ::close(fd_); }

    bool connected() const { return connected_; }
    const std::string& handshake_response() const { return response_; }

    void send(const std::string& message) {
        const std::string bytes =
            websocket_ ? websocket_frame(WsOpcode::text, message, 0xa1b2c3d4u) : length_prefixed(message);
        send_raw(bytes);
    }

    void send_raw(const std::string& bytes) { ASSERT_EQ(::send(fd_, bytes.data(), bytes.size(), MSG_NOSIGNAL), static_cast<ssize_t>(bytes.size())); }

    // Next message, or nullopt on timeout / close.
    std::optional<json> receive(int timeout_ms = 3000) {
        const auto deadline = std::chrono::steady_clock::now() + std::chrono::milliseconds(timeout_ms);
        for (;;) {
            if (auto m = pop()) return json::parse(*m);
            const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now()).count();
            if (left <= 0 || !read_some(static_cast<int>(left))) return std::nullopt;
        }
    }

    // Waits for the peer to close the connection.
    bool closed_by_peer(int timeout_ms = 3000) {
        const auto deadline = std::chrono::steady_clock::now() + std::chrono::milliseconds(timeout_ms);
        while (std::chrono::steady_clock::now() < deadline) {
            pollfd p{fd_, POLLIN, 0};
            if (::poll(&p, 1, 50) <= 0) continue;
            char buf[4096];
            if (::recv(fd_, buf, sizeof buf, 0) <= 0) return true;
        }
        return false;
    }

private:
    int fd_ = -1;
    bool connected_ = false;
    bool websocket_ = false;
    std::string response_;
    LengthPrefixDecoder tcp_;
    WebSocketDecoder ws_{false};

    bool read_some(int timeout_ms) {
        pollfd p{fd_, POLLIN, 0};
        if (::poll(&p, 1, timeout_ms) <= 0) return false;
        char buf[65536];
        const ssize_t n = ::recv(fd_, buf, sizeof buf, 0);
        if (n <= 0) return false;
        const std::string_view bytes(buf, static_cast<std::size_t>(n));
        if (websocket_) {
            ws_.feed(bytes);
        } else {
            tcp_.feed(bytes);
        }
        return true;
    }

    std::optional<std::string> pop() {
        if (!websocket_) return tcp_.next();
        while (auto m = ws_.next()) {
            if (m->opcode == WsOpcode::text) return m->payload;
        }
        return std::nullopt;
    }

    void handshake() {
        send_raw("GET / HTTP/1.1\r\nHost: localhost\r\nUpgrade: websocket\r\nConnection: Upgrade\r\n"
                 "Sec-WebSocket-Key: dGhlIHNhbXBsZSBub25jZQ==\r\nSec-WebSocket-Version: 13\r\n\r\n");
        while (response_.find("\r\n\r\n") == std::string::npos) {
            pollfd p{fd_, POLLIN, 0};
            if (::poll(&p, 1, 3000) <= 0) return;
            char c;
            if (::recv(fd_, &c, 1, 0) != 1) return;
            response_.push_back(c);
        }
    }
};

std::string input_message(std::uint64_t tick, std::vector<std::string> keys = {}) {
    InputFrame in;
    in.tick = tick;
    in.keys = std::move(keys);
    return encode_input(in);
}

} // namespace

TEST(Server, TcpHelloGetsConfigThenFramesAtTickRate) {
    ServerFixture server({});
    Client c(server.port());
    ASSERT_TRUE(c.connected());
    c.send(encode_hello());
    const auto config = c.receive();
    ASSERT_TRUE(config.has_value());
    EXPECT_EQ((*config)["type"], "config");
    EXPECT_EQ((*config)["scene_name"], "server-test");

    const auto start = std::chrono::steady_clock::now();
    std::uint64_t last = 0;
    for (int i = 0; i < 30; ++i) {
        const auto frame = c.receive();
        ASSERT_TRUE(frame.has_value()) << "frame " << i;
        ASSERT_EQ((*frame)["type"], "frame");
        const auto tick = (*frame)["tick"].get<std::uint64_t>();
        EXPECT_EQ(tick, last + 1);
        last = tick;
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    // 30 frames at 60 Hz take half a second; allow generous slack either way.
    EXPECT_GT(seconds, 0.3);
    EXPECT_LT(seconds, 3.0);
}

TEST(Server, FirstFrameCarriesGeometryLaterFramesReuseIt) {
    ServerOptions options;
    options.lockstep = true;
    ServerFixture server(options);
    Client c(server.port());
    c.send(encode_hello());
    ASSERT_TRUE(c.receive().has_value());
    c.send(input_message(1));
    const auto first = c.receive();
    ASSERT_TRUE(first.has_value());
    ASSERT_EQ((*first)["meshes"].size(), 1u);
    EXPECT_TRUE((*first)["meshes"][0].contains("mesh"));
    c.send(input_message(2));
    const auto second = c.receive();
    ASSERT_TRUE(second.has_value());
    EXPECT_EQ((*second)["meshes"][0]["changed"], false);
    EXPECT_FALSE((*second)["meshes"][0].contains("mesh"));
}

TEST(Server, MalformedMessageGetsErrorAndConnectionStaysUp) {
    ServerOptions options;
    options.lockstep = true;
    ServerFixture server(options);
    Client c(server.port());
    c.send(encode_hello());
    ASSERT_TRUE(c.receive().has_value());
    c.send("{not json");
    auto reply = c.receive();
    ASSERT_TRUE(reply.has_value());
    EXPECT_EQ((*reply)["type"], "error");
    c.send(R"({"type": "input", "keys": [1]})");
    reply = c.receive();
    ASSERT_TRUE(reply.has_value());
    EXPECT_EQ((*reply)["type"], "error");
    EXPECT_NE((*reply)["message"].get<std::string>().find("/keys/0"), std::string::npos);
    c.send(input_message(1));
    reply = c.receive();
    ASSERT_TRUE(reply.has_value());
    EXPECT_EQ((*reply)["type"], "frame");
}

TEST(Server, InputBeforeHelloIsAnError) {
    ServerOptions options;
    options.lockstep = true;
    ServerFixture server(options);
    Client c(server.port());
    c.send(input_message(1));
    const auto reply = c.receive();
    ASSERT_TRUE(reply.has_value());
    EXPECT_EQ((*reply)["type"], "error");
}

TEST(Server, WrongProtocolVersionClosesConnection) {
    ServerFixture server({});
    Client c(server.port());
    c.send(encode_hello(99));
    const auto reply = c.receive();
    ASSERT_TRUE(reply.has_value());
    EXPECT_EQ((*reply)["type"], "error");
    EXPECT_TRUE(c.closed_by_peer());
}

TEST(Server, DisconnectReturnsToAcceptingWithFreshSession) {
    ServerOptions options;
    options.lockstep = true;
    ServerFixture server(options);
    for (int round = 0; round < 2; ++round) {
        Client c(server.port());
        ASSERT_TRUE(c.connected());
        c.send(encode_hello());
        ASSERT_TRUE(c.receive().has_value());
        c.send(input_message(1));
        const auto frame = c.receive();
        ASSERT_TRUE(frame.has_value()) << "round " << round;
        EXPECT_EQ((*frame)["tick"], 1) << "round " << round;
    }
}

TEST(Server, LockstepQBurstMovesPlayerW) {
    ServerOptions options;
    options.lockstep = true;
    ServerFixture server(options);
    Client c(server.port());
    c.send(encode_hello());
    ASSERT_TRUE(c.receive().has_value());
    double w = 0.0;
    for (std::uint64_t t = 1; t <= 5; ++t) {
        c.send(input_message(t, {"Q"}));
        const auto frame = c.receive();
        ASSERT_TRUE(frame.has_value());
        const double now = (*frame)["camera"]["player_w"].get<double>();
        EXPECT_LT(now, w);
        w = now;
    }
    EXPECT_NEAR(w, -5 * kTickDt, 1e-12);
}

TEST(Server, WebSocketTransport) {
    ServerOptions options;
    options.lockstep = true;
    ServerFixture server(options);
    Client c(server.port(), true);
    ASSERT_TRUE(c.connected());
    EXPECT_EQ(c.handshake_response().rfind("HTTP/1.1 101", 0), 0u);
    EXPECT_NE(c.handshake_response().find("s3pPLMBiTxaQ9kYGzzhZRbK+xOo="), std::string::npos);
    c.send(encode_hello());
    const auto config = c.receive();
    ASSERT_TRUE(config.has_value());
    EXPECT_EQ((*config)["type"], "config");
    c.send(input_message(1, {"E"}));
    const auto frame = c.receive();
    ASSERT_TRUE(frame.has_value());
    EXPECT_EQ((*frame)["type"], "frame");
    EXPECT_GT((*frame)["camera"]["player_w"].get<double>(), 0.0);
}

TEST(Server, RecordsInputsAsReplayableLog) {
    const auto path = std::filesystem::temp_directory_path() / "continuum_server_record.jsonl";
    std::filesystem::remove(path);
    ServerOptions options;
    options.lockstep = true;
    options.record_inputs = path;
    {
        ServerFixture server(options);
        Client c(server.port());
        c.send(encode_hello());
        ASSERT_TRUE(c.receive().has_value());
        for (std::uint64_t t = 1; t <= 3; ++t) {
            c.send(input_message(100 + t, {"W"}));
            ASSERT_TRUE(c.receive().has_value());
        }
    }
    const auto log = load_input_log(path);
    ASSERT_EQ(log.size(), 3u);
    EXPECT_EQ(log[0].tick, 1u); // renumbered to session ticks
    EXPECT_EQ(log[2].keys, std::vector<std::string>{"W"});
    std::filesystem::remove(path);
}

TEST(Server, BindFailureReported) {
    SessionServer first(small_scene(), ServerOptions{.port = 0});
    first.bind();
    ServerOptions clash;
    clash.port = first.port();
    SessionServer second(small_scene(), clash);
    EXPECT_THROW(second.bind(), BindError);
    ServerOptions bad;
    bad.host = "not-an-address";
    SessionServer third(small_scene(), bad);
    EXPECT_THROW(third.bind(), BindError);
}

TEST(Server, MaxConnectionsEndsRun) {
    ServerOptions options;
    options.port = 0;
    options.lockstep = true;
    options.max_connections = 1;
    SessionServer server(small_scene(), options);
    server.bind();
    std::thread t([&] { server.run(); });
    {
        Client c(server.port());
        c.send(encode_hello());
        ASSERT_TRUE(c.receive().has_value());
    }
    t.join(); // returns once the single connection is served
    SUCCEED();
}
