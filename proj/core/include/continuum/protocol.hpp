#pragma once

// Viewer wire protocol. Messages are JSON objects with a "type" field:
//
//   client -> server   hello, input
//   server -> client   config, frame, error
//
// carried either as raw TCP with a 4-byte big-endian length prefix or as
// WebSocket text frames (RFC 6455). Input logs are JSON Lines of input
// messages.

#include "continuum/session.hpp"

#include <cstdint>
#include <deque>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace continuum {

inline constexpr int kProtocolVersion = 1;
inline constexpr int kTickRate = 60;
inline constexpr double kTickDt = 2.0 * kFixedTimestep;
inline constexpr std::size_t kMaxMessageBytes = 64u << 20;

std::string encode_config(const Scene& scene);
// Unchanged meshes are sent without geometry; the viewer reuses its copy.
std::string encode_frame(const Frame& frame);
std::string encode_error(std::string_view message);
std::string encode_event(const Event& event, std::uint64_t tick);
std::string encode_input(const InputFrame& input);
std::string encode_hello(int version = kProtocolVersion);

enum class ClientMessageKind { hello, input };

struct ClientMessage {
    ClientMessageKind kind = ClientMessageKind::hello;
    int version = 0;     // hello
    InputFrame input{};  // input
};

// Throws ParseError with a path into the message.
ClientMessage decode_client_message(std::string_view text);
InputFrame decode_input(std::string_view text);

std::vector<InputFrame> read_input_log(std::istream& in);
std::vector<InputFrame> load_input_log(const std::filesystem::path& path);
void write_input_log(std::ostream& out, const std::vector<InputFrame>& inputs);

// ---- length-prefixed framing ----

std::string length_prefixed(std::string_view payload);

class LengthPrefixDecoder {
public:
    void feed(std::string_view bytes);
    // Next complete payload, if any. Throws ParseError for oversize frames.
    std::optional<std::string> next();

private:
    std::string buffer_;
};

// ---- WebSocket ----

// Sec-WebSocket-Accept value for a client key.
std::string websocket_accept_key(std::string_view client_key);

enum class WsOpcode : std::uint8_t { continuation = 0x0, text = 0x1, binary = 0x2, close = 0x8, ping = 0x9, pong = 0xA };

struct WsMessage {
    WsOpcode opcode = WsOpcode::text;
    std::string payload;
};

// Single unfragmented frame. Servers send unmasked frames; clients must
// pass a mask key.
std::string websocket_frame(WsOpcode opcode, std::string_view payload, std::optional<std::uint32_t> mask = std::nullopt);

// Reassembles fragmented data messages; control frames are returned as they
// arrive. Throws ParseError on protocol violations.
class WebSocketDecoder {
public:
    explicit WebSocketDecoder(bool require_mask = true) : require_mask_(require_mask) {}
    void feed(std::string_view bytes);
    std::optional<WsMessage> next();

private:
    bool require_mask_;
    std::string buffer_;
    std::string partial_;
    std::optional<WsOpcode> partial_opcode_;
    std::deque<WsMessage> ready_;
    void parse();
};

// Parsed HTTP upgrade request; nullopt until the header block is complete.
struct HttpRequest {
    std::string method;
    std::string target;
    std::vector<std::pair<std::string, std::string>> headers; // lower-cased names
    std::optional<std::string> header(std::string_view name) const;
};
std::optional<HttpRequest> parse_http_request(std::string_view data, std::size_t* consumed = nullptr);
std::string websocket_handshake_response(const HttpRequest& request);

} // namespace continuum
