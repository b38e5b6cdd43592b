#include "vsrtp/control.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>

namespace vsrtp {

namespace {

constexpr std::string_view kCrlf = "\r\n";
constexpr std::string_view kCSeq = "CSeq";
constexpr std::string_view kTransportPrefix = "RTP/AVP;unicast;client_port=";

bool iequals(std::string_view a, std::string_view b)
{
    return a.size() == b.size() && std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
               return std::tolower(static_cast<unsigned char>(x)) == std::tolower(static_cast<unsigned char>(y));
           });
}

template <typename T>
std::optional<T> parse_decimal(std::string_view s)
{
    if (s.empty() || s.size() > 10) {
        return std::nullopt;
    }
    T value {};
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc {} || ptr != s.data() + s.size()) {
        return std::nullopt;
    }
    return value;
}

bool valid_token(std::string_view s)
{
    if (s.empty()) {
        return false;
    }
    return std::all_of(s.begin(), s.end(), [](char c) {
        const auto u = static_cast<unsigned char>(c);
        return u > 0x20 && u < 0x7f;
    });
}

bool valid_header_name(std::string_view s)
{
    return valid_token(s) && s.find(':') == std::string_view::npos;
}

bool valid_header_value(std::string_view s)
{
    return std::all_of(s.begin(), s.end(), [](char c) {
        const auto u = static_cast<unsigned char>(c);
        return u >= 0x20 && u != 0x7f;
    });
}

std::optional<std::string_view> find_header(const HeaderList& headers, std::string_view name)
{
    for (const auto& [n, v] : headers) {
        if (iequals(n, name)) {
            return std::string_view { v };
        }
    }
    return std::nullopt;
}

void set_header_in(HeaderList& headers, std::string_view name, std::string value)
{
    for (auto& [n, v] : headers) {
        if (iequals(n, name)) {
            v = std::move(value);
            return;
        }
    }
    headers.emplace_back(std::string(name), std::move(value));
}

void append_headers(std::string& out, std::uint32_t cseq, const HeaderList& headers)
{
    out += "CSeq: ";
    out += std::to_string(cseq);
    out += kCrlf;
    for (const auto& [n, v] : headers) {
        out += n;
        out += ": ";
        out += v;
        out += kCrlf;
    }
    out += kCrlf;
}

// Splits a message into its first line and header lines. Fails unless the
// text ends with exactly one empty line and contains no bare CR or LF.
bool split_lines(std::string_view text, std::vector<std::string_view>& lines)
{
    if (text.size() > kMaxControlMessage) {
        return false;
    }
    while (true) {
        const std::size_t pos = text.find(kCrlf);
        if (pos == std::string_view::npos) {
            return false;
        }
        const std::string_view line = text.substr(0, pos);
        if (line.find_first_of("\r\n") != std::string_view::npos) {
            return false;
        }
        text.remove_prefix(pos + kCrlf.size());
        if (line.empty()) {
            return text.empty() && !lines.empty();
        }
        lines.push_back(line);
    }
}

// Parses header lines after the start line; pulls out CSeq.
ControlParseError parse_header_block(const std::vector<std::string_view>& lines, std::uint32_t& cseq,
                                     HeaderList& headers)
{
    bool have_cseq = false;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const std::string_view line = lines[i];
        const std::size_t colon = line.find(':');
        if (colon == std::string_view::npos) {
            return ControlParseError::MalformedLine;
        }
        const std::string_view name = line.substr(0, colon);
        std::string_view value = line.substr(colon + 1);
        while (!value.empty() && value.front() == ' ') {
            value.remove_prefix(1);
        }
        if (!valid_header_name(name) || !valid_header_value(value)) {
            return ControlParseError::MalformedLine;
        }
        if (iequals(name, kCSeq)) {
            const auto n = parse_decimal<std::uint32_t>(value);
            if (have_cseq || !n) {
                return ControlParseError::MalformedLine;
            }
            cseq = *n;
            have_cseq = true;
            continue;
        }
        headers.emplace_back(std::string(name), std::string(value));
    }
    return have_cseq ? ControlParseError::None : ControlParseError::MissingCSeq;
}

} // namespace

const char* to_string(Method m)
{
    switch (m) {
    case Method::Setup:
        return "SETUP";
    case Method::Play:
        return "PLAY";
    case Method::Pause:
        return "PAUSE";
    case Method::Teardown:
        return "TEARDOWN";
    }
    return "?";
}

std::optional<Method> method_from_string(std::string_view s)
{
    for (const Method m : { Method::Setup, Method::Play, Method::Pause, Method::Teardown }) {
        if (s == to_string(m)) {
            return m;
        }
    }
    return std::nullopt;
}

const char* reason_phrase(Status s)
{
    switch (s) {
    case Status::Ok:
        return "OK";
    case Status::BadRequest:
        return "Bad Request";
    case Status::NotFound:
        return "Not Found";
    case Status::MethodNotValidInState:
        return "Method Not Valid in This State";
    case Status::InternalError:
        return "Internal Server Error";
    }
    return "Unknown";
}

const char* to_string(ControlParseError e)
{
    switch (e) {
    case ControlParseError::None:
        return "none";
    case ControlParseError::MalformedLine:
        return "malformed line";
    case ControlParseError::UnknownMethod:
        return "unknown method";
    case ControlParseError::MissingCSeq:
        return "missing CSeq";
    }
    return "?";
}

std::optional<std::string_view> ControlRequest::header(std::string_view name) const
{
    return find_header(headers, name);
}

ControlRequest& ControlRequest::set_header(std::string_view name, std::string value)
{
    set_header_in(headers, name, std::move(value));
    return *this;
}

std::optional<std::string_view> ControlResponse::header(std::string_view name) const
{
    return find_header(headers, name);
}

ControlResponse& ControlResponse::set_header(std::string_view name, std::string value)
{
    set_header_in(headers, name, std::move(value));
    return *this;
}

std::string serialize_request(const ControlRequest& r)
{
    std::string out;
    out += to_string(r.method);
    out += ' ';
    out += r.uri;
    out += ' ';
    out += kRtspVersion;
    out += kCrlf;
    append_headers(out, r.cseq, r.headers);
    return out;
}

std::string serialize_response(const ControlResponse& r)
{
    std::string out;
    out += kRtspVersion;
    out += ' ';
    out += std::to_string(static_cast<int>(r.status));
    out += ' ';
    out += reason_phrase(r.status);
    out += kCrlf;
    append_headers(out, r.cseq, r.headers);
    return out;
}

RequestParse parse_request(std::string_view text)
{
    RequestParse result;
    std::vector<std::string_view> lines;
    if (!split_lines(text, lines)) {
        result.error = ControlParseError::MalformedLine;
        return result;
    }

    const std::string_view start = lines[0];
    const std::size_t sp1 = start.find(' ');
    const std::size_t sp2 = sp1 == std::string_view::npos ? sp1 : start.find(' ', sp1 + 1);
    if (sp2 == std::string_view::npos || start.find(' ', sp2 + 1) != std::string_view::npos) {
        result.error = ControlParseError::MalformedLine;
        return result;
    }
    const std::string_view method = start.substr(0, sp1);
    const std::string_view uri = start.substr(sp1 + 1, sp2 - sp1 - 1);
    const std::string_view version = start.substr(sp2 + 1);
    if (!valid_token(method) || !valid_token(uri) || version != kRtspVersion) {
        result.error = ControlParseError::MalformedLine;
        return result;
    }
    const auto m = method_from_string(method);
    if (!m) {
        result.error = ControlParseError::UnknownMethod;
        return result;
    }
    result.request.method = *m;
    result.request.uri = std::string(uri);
    result.error = parse_header_block(lines, result.request.cseq, result.request.headers);
    return result;
}

ResponseParse parse_response(std::string_view text)
{
    ResponseParse result;
    std::vector<std::string_view> lines;
    if (!split_lines(text, lines)) {
        result.error = ControlParseError::MalformedLine;
        return result;
    }
    const std::string_view start = lines[0];
    if (start.substr(0, kRtspVersion.size()) != kRtspVersion || start.size() < kRtspVersion.size() + 5 ||
        start[kRtspVersion.size()] != ' ') {
        result.error = ControlParseError::MalformedLine;
        return result;
    }
    const auto code = parse_decimal<int>(start.substr(kRtspVersion.size() + 1, 3));
    bool known = false;
    for (const Status s : { Status::Ok, Status::BadRequest, Status::NotFound, Status::MethodNotValidInState,
                            Status::InternalError }) {
        if (code && *code == static_cast<int>(s)) {
            result.response.status = s;
            known = true;
        }
    }
    if (!known) {
        result.error = ControlParseError::MalformedLine;
        return result;
    }
    result.error = parse_header_block(lines, result.response.cseq, result.response.headers);
    return result;
}

std::string format_transport(std::uint16_t client_port)
{
    return std::string(kTransportPrefix) + std::to_string(client_port);
}

std::optional<std::uint16_t> parse_transport(std::string_view value)
{
    if (value.substr(0, kTransportPrefix.size()) != kTransportPrefix) {
        return std::nullopt;
    }
    const auto port = parse_decimal<std::uint32_t>(value.substr(kTransportPrefix.size()));
    if (!port || *port == 0 || *port > 65535) {
        return std::nullopt;
    }
    return static_cast<std::uint16_t>(*port);
}

std::string format_master_salt(const Salt128& salt)
{
    return to_hex(salt);
}

std::optional<Salt128> parse_master_salt(std::string_view value)
{
    if (value.size() != 2 * kMasterSaltSize ||
        !std::all_of(value.begin(), value.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)) || (c >= 'a' && c <= 'f'); })) {
        return std::nullopt;
    }
    const auto bytes = from_hex(value);
    Salt128 salt {};
    std::copy(bytes->begin(), bytes->end(), salt.begin());
    return salt;
}

std::string format_session(SessionId id)
{
    return std::to_string(id.value());
}

std::optional<SessionId> parse_session(std::string_view value)
{
    const auto n = parse_decimal<std::uint32_t>(value);
    if (!n || *n == 0) {
        return std::nullopt;
    }
    return SessionId { *n };
}

} // namespace vsrtp
