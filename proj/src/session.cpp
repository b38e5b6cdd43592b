#include "vsrtp/session.hpp"

#include <spdlog/spdlog.h>

namespace vsrtp {

namespace {

ControlResponse reply(const ControlRequest& request, Status status)
{
    ControlResponse r;
    r.cseq = request.cseq;
    r.status = status;
    return r;
}

bool session_matches(const SessionState& state, const ControlRequest& request)
{
    const auto value = request.header(header_name::kSession);
    if (!value) {
        return false;
    }
    const auto id = parse_session(*value);
    return id && state.session_id && *id == *state.session_id;
}

TransitionResult setup(const SessionState& state, const ControlRequest& request, const ServerContext& ctx)
{
    const auto transport = request.header(header_name::kTransport);
    const auto salt_value = request.header(header_name::kMasterSalt);
    const auto port = transport ? parse_transport(*transport) : std::nullopt;
    const auto salt = salt_value ? parse_master_salt(*salt_value) : std::nullopt;
    if (!port || !salt) {
        return { state, reply(request, Status::BadRequest) };
    }
    const std::uint16_t rtp_port = port.value();
    if (ctx.resource_exists && !ctx.resource_exists(request.uri)) {
        return { state, reply(request, Status::NotFound) };
    }

    MasterSecret master;
    try {
        master = MasterSecret(ctx.key_provider.fetch_master_key(ctx.peer_identity, request.uri), *salt);
    } catch (const KeyProvisioningError& e) {
        const Status s = e.code() == KeyProvisioningError::Code::KeyNotFound ? Status::NotFound : Status::InternalError;
        return { state, reply(request, s) };
    }

    const SessionId id = ctx.registry.mint();
    TransitionResult result { state, reply(request, Status::Ok) };
    try {
        result.state.keys = derive_session_keys(master, id);
    } catch (...) {
        secure_wipe(master.master_key);
        ctx.registry.release(id);
        return { state, reply(request, Status::InternalError) };
    }
    secure_wipe(master.master_key);
    result.state.phase = SessionPhase::Ready;
    result.state.session_id = id;
    result.state.rtp_port = rtp_port;
    result.state.uri = request.uri;
    result.response.set_header(header_name::kTransport, format_transport(rtp_port));
    result.response.set_header(header_name::kSession, format_session(id));
    return result;
}

} // namespace

const char* to_string(SessionPhase p)
{
    switch (p) {
    case SessionPhase::Init:
        return "Init";
    case SessionPhase::Ready:
        return "Ready";
    case SessionPhase::Playing:
        return "Playing";
    }
    return "?";
}

bool invariants_hold(const SessionState& s)
{
    const bool active = s.phase != SessionPhase::Init;
    if (active != s.keys.has_value() || active != s.session_id.has_value()) {
        return false;
    }
    if (s.keys && s.keys->session_id != *s.session_id) {
        return false;
    }
    return s.phase != SessionPhase::Playing || s.rtp_port != 0;
}

SessionId SessionRegistry::mint()
{
    std::lock_guard lock(mutex_);
    for (;;) {
        const std::uint32_t v = random_u32();
        if (v != 0 && live_.insert(v).second) {
            return SessionId { v };
        }
    }
}

void SessionRegistry::release(SessionId id)
{
    std::lock_guard lock(mutex_);
    live_.erase(id.value());
}

bool SessionRegistry::live(SessionId id) const
{
    std::lock_guard lock(mutex_);
    return live_.count(id.value()) != 0;
}

std::size_t SessionRegistry::size() const
{
    std::lock_guard lock(mutex_);
    return live_.size();
}

TransitionResult transition(const SessionState& state, const ControlRequest& request, const ServerContext& ctx)
{
    try {
        switch (request.method) {
        case Method::Setup:
            if (state.phase != SessionPhase::Init) {
                return { state, reply(request, Status::MethodNotValidInState) };
            }
            return setup(state, request, ctx);

        case Method::Play:
        case Method::Pause: {
            const SessionPhase from = request.method == Method::Play ? SessionPhase::Ready : SessionPhase::Playing;
            const SessionPhase to = request.method == Method::Play ? SessionPhase::Playing : SessionPhase::Ready;
            if (state.phase != from) {
                return { state, reply(request, Status::MethodNotValidInState) };
            }
            if (!session_matches(state, request)) {
                return { state, reply(request, Status::BadRequest) };
            }
            TransitionResult result { state, reply(request, Status::Ok) };
            result.state.phase = to;
            result.response.set_header(header_name::kSession, format_session(*state.session_id));
            return result;
        }

        case Method::Teardown: {
            if (state.phase == SessionPhase::Init) {
                return { state, reply(request, Status::Ok) };
            }
            if (!session_matches(state, request)) {
                return { state, reply(request, Status::BadRequest) };
            }
            ctx.registry.release(*state.session_id);
            TransitionResult result { SessionState {}, reply(request, Status::Ok) };
            result.response.set_header(header_name::kSession, format_session(*state.session_id));
            return result;
        }
        }
    } catch (const std::exception& e) {
        spdlog::error("control: {} failed: {}", to_string(request.method), e.what());
    }
    return { state, reply(request, Status::InternalError) };
}

// ControlServerSession

ControlServerSession::ControlServerSession(ControlChannel& channel, ServerContext ctx)
    : channel_(channel)
    , ctx_(std::move(ctx))
{
}

ControlServerSession::~ControlServerSession()
{
    if (state_.session_id) {
        ctx_.registry.release(*state_.session_id);
    }
}

ControlResponse ControlServerSession::handle(std::string_view message)
{
    const RequestParse parsed = parse_request(message);
    if (parsed.error != ControlParseError::None) {
        spdlog::warn("control: rejected request ({})", to_string(parsed.error));
        ControlResponse r;
        r.cseq = parsed.error == ControlParseError::MissingCSeq ? 0 : parsed.request.cseq;
        r.status = Status::BadRequest;
        return r;
    }
    const ControlRequest& request = parsed.request;
    if (last_cseq_ && request.cseq <= *last_cseq_) {
        spdlog::warn("control: non-increasing CSeq {}", request.cseq);
        return reply(request, Status::BadRequest);
    }
    last_cseq_ = request.cseq;

    TransitionResult result = transition(state_, request, ctx_);
    if (result.state.phase != state_.phase) {
        spdlog::info("control: {} {} -> {}", to_string(request.method), to_string(state_.phase),
                     to_string(result.state.phase));
    }
    if (hook_) {
        hook_(state_, result.state, request);
    }
    state_ = std::move(result.state);
    return result.response;
}

bool ControlServerSession::serve_one(std::chrono::milliseconds timeout)
{
    ChannelReceive in = channel_.receive_message(timeout);
    switch (in.status) {
    case ChannelReceive::Status::Timeout:
        return true;
    case ChannelReceive::Status::Closed:
        return false;
    case ChannelReceive::Status::Overflow:
        spdlog::warn("control: message exceeds {} bytes, closing", kMaxControlMessage);
        channel_.close();
        return false;
    case ChannelReceive::Status::Ok:
        break;
    }
    const ControlResponse response = handle(in.message);
    try {
        channel_.send_message(serialize_response(response));
    } catch (const ChannelError&) {
        return false;
    }
    return true;
}

void ControlServerSession::serve(const std::function<bool()>& stop, std::chrono::milliseconds poll)
{
    while (!(stop && stop()) && serve_one(poll)) {
    }
}

// ControlClient

ControlClient::ControlClient(ControlChannel& channel, const KeyProvider& key_provider,
                             std::chrono::milliseconds timeout, std::string peer_identity)
    : channel_(channel)
    , key_provider_(key_provider)
    , timeout_(timeout)
    , peer_identity_(std::move(peer_identity))
{
}

ControlResponse ControlClient::exchange(ControlRequest request)
{
    request.cseq = next_cseq_++;
    try {
        channel_.send_message(serialize_request(request));
    } catch (const ChannelError& e) {
        throw ControlError(ControlError::Kind::Closed, e.what());
    }
    const ChannelReceive in = channel_.receive_message(timeout_);
    switch (in.status) {
    case ChannelReceive::Status::Timeout:
        throw ControlError(ControlError::Kind::Timeout, "no response to " + std::string(to_string(request.method)));
    case ChannelReceive::Status::Closed:
        throw ControlError(ControlError::Kind::Closed, "control connection closed");
    case ChannelReceive::Status::Overflow:
        throw ControlError(ControlError::Kind::Protocol, "oversized response");
    case ChannelReceive::Status::Ok:
        break;
    }
    const ResponseParse parsed = parse_response(in.message);
    if (parsed.error != ControlParseError::None) {
        throw ControlError(ControlError::Kind::Protocol,
                           std::string("malformed response: ") + to_string(parsed.error));
    }
    if (parsed.response.cseq != request.cseq) {
        throw ControlError(ControlError::Kind::Protocol, "response CSeq does not match request");
    }
    if (parsed.response.status != Status::Ok) {
        throw ControlError(ControlError::Kind::RemoteError,
                           std::string(to_string(request.method)) + " failed: " +
                               std::to_string(static_cast<int>(parsed.response.status)) + " " +
                               reason_phrase(parsed.response.status),
                           parsed.response.status);
    }
    return parsed.response;
}

SessionKeys ControlClient::setup(const std::string& uri, std::uint16_t rtp_port)
{
    const Salt128 salt = fresh_master_salt();
    ControlRequest request;
    request.method = Method::Setup;
    request.uri = uri;
    request.set_header(header_name::kTransport, format_transport(rtp_port));
    request.set_header(header_name::kMasterSalt, format_master_salt(salt));

    const ControlResponse response = exchange(std::move(request));
    const auto value = response.header(header_name::kSession);
    const auto id = value ? parse_session(*value) : std::nullopt;
    if (!id) {
        throw ControlError(ControlError::Kind::Protocol, "SETUP response without a valid Session header");
    }
    MasterSecret master(key_provider_.fetch_master_key(peer_identity_, uri), salt);
    keys_ = derive_session_keys(master, *id);
    secure_wipe(master.master_key);
    session_id_ = id;
    uri_ = uri;
    phase_ = SessionPhase::Ready;
    return *keys_;
}

void ControlClient::play()
{
    ControlRequest request;
    request.method = Method::Play;
    request.uri = uri_.empty() ? std::string("*") : uri_;
    if (session_id_) {
        request.set_header(header_name::kSession, format_session(*session_id_));
    }
    exchange(std::move(request));
    phase_ = SessionPhase::Playing;
}

void ControlClient::pause()
{
    ControlRequest request;
    request.method = Method::Pause;
    request.uri = uri_.empty() ? std::string("*") : uri_;
    if (session_id_) {
        request.set_header(header_name::kSession, format_session(*session_id_));
    }
    exchange(std::move(request));
    phase_ = SessionPhase::Ready;
}

void ControlClient::teardown()
{
    ControlRequest request;
    request.method = Method::Teardown;
    request.uri = uri_.empty() ? std::string("*") : uri_;
    if (session_id_) {
        request.set_header(header_name::kSession, format_session(*session_id_));
    }
    exchange(std::move(request));
    session_id_.reset();
    keys_.reset();
    phase_ = SessionPhase::Init;
}

} // namespace vsrtp
