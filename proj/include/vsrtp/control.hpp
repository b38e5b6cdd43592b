#ifndef VSRTP_CONTROL_HPP
#define VSRTP_CONTROL_HPP

#include "vsrtp/crypto.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

// RTSP-like control messages.
//
//   request   = METHOD SP uri SP "RTSP/1.0" CRLF "CSeq: " n CRLF *(header CRLF) CRLF
//   response  = "RTSP/1.0" SP status SP reason CRLF "CSeq: " n CRLF *(header CRLF) CRLF
//   header    = name ": " value

namespace vsrtp {

inline constexpr std::string_view kRtspVersion = "RTSP/1.0";
inline constexpr std::uint16_t kDefaultControlPort = 8554;
inline constexpr std::uint16_t kDefaultRtpPort = 5004;
inline constexpr std::size_t kMaxControlMessage = 64 * 1024;

namespace header_name {
inline constexpr std::string_view kTransport = "Transport";
inline constexpr std::string_view kMasterSalt = "Master-Salt";
inline constexpr std::string_view kSession = "Session";
} // namespace header_name

enum class Method { Setup, Play, Pause, Teardown };

enum class Status : int {
    Ok = 200,
    BadRequest = 400,
    NotFound = 404,
    MethodNotValidInState = 455,
    InternalError = 500,
};

enum class ControlParseError { None, MalformedLine, UnknownMethod, MissingCSeq };

const char* to_string(Method m);
std::optional<Method> method_from_string(std::string_view s);
const char* reason_phrase(Status s);
const char* to_string(ControlParseError e);

using HeaderList = std::vector<std::pair<std::string, std::string>>;

struct ControlRequest {
    Method method = Method::Setup;
    std::string uri;
    std::uint32_t cseq = 0;
    HeaderList headers;

    /// Case-insensitive lookup of the first header with this name.
    std::optional<std::string_view> header(std::string_view name) const;
    ControlRequest& set_header(std::string_view name, std::string value);

    friend bool operator==(const ControlRequest&, const ControlRequest&) = default;
};

struct ControlResponse {
    std::uint32_t cseq = 0;
    Status status = Status::Ok;
    HeaderList headers;

    std::optional<std::string_view> header(std::string_view name) const;
    ControlResponse& set_header(std::string_view name, std::string value);

    friend bool operator==(const ControlResponse&, const ControlResponse&) = default;
};

std::string serialize_request(const ControlRequest& r);
std::string serialize_response(const ControlResponse& r);

struct RequestParse {
    ControlParseError error = ControlParseError::None;
    ControlRequest request;
};

struct ResponseParse {
    ControlParseError error = ControlParseError::None;
    ControlResponse response;
};

/// Total over arbitrary input: never throws on malformed text.
RequestParse parse_request(std::string_view text);
ResponseParse parse_response(std::string_view text);

// Header value helpers.

std::string format_transport(std::uint16_t client_port);
std::optional<std::uint16_t> parse_transport(std::string_view value);

std::string format_master_salt(const Salt128& salt);
std::optional<Salt128> parse_master_salt(std::string_view value);

std::string format_session(SessionId id);
std::optional<SessionId> parse_session(std::string_view value);

} // namespace vsrtp

#endif // VSRTP_CONTROL_HPP
