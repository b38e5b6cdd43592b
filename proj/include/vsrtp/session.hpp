#ifndef VSRTP_SESSION_HPP
#define VSRTP_SESSION_HPP

#include "vsrtp/control.hpp"
#include "vsrtp/control_channel.hpp"
#include "vsrtp/keys.hpp"

#include <chrono>
#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_set>

namespace vsrtp {

enum class SessionPhase { Init, Ready, Playing };

const char* to_string(SessionPhase p);

struct SessionState {
    SessionPhase phase = SessionPhase::Init;
    std::optional<SessionId> session_id;
    std::uint16_t rtp_port = 0;
    std::string uri;
    std::optional<SessionKeys> keys;
};

/// Keys and session id present iff phase != Init; Playing has a port.
bool invariants_hold(const SessionState& s);

/// Live session ids for one server. Thread-safe.
class SessionRegistry {
public:
    /// Uniform random non-zero id not currently live.
    SessionId mint();
    void release(SessionId id);
    bool live(SessionId id) const;
    std::size_t size() const;

private:
    mutable std::mutex mutex_;
    std::unordered_set<std::uint32_t> live_;
};

struct ServerContext {
    const KeyProvider& key_provider;
    SessionRegistry& registry;
    /// Empty function accepts every uri.
    std::function<bool(std::string_view uri)> resource_exists;
    std::string peer_identity;
};

struct TransitionResult {
    SessionState state;
    ControlResponse response;
};

/// Total: every failure becomes a response code with the state unchanged.
TransitionResult transition(const SessionState& state, const ControlRequest& request, const ServerContext& ctx);

/// Server side of one control connection.
class ControlServerSession {
public:
    using TransitionHook =
        std::function<void(const SessionState& before, const SessionState& after, const ControlRequest& request)>;

    ControlServerSession(ControlChannel& channel, ServerContext ctx);
    ~ControlServerSession();

    ControlServerSession(const ControlServerSession&) = delete;
    ControlServerSession& operator=(const ControlServerSession&) = delete;

    void on_transition(TransitionHook hook) { hook_ = std::move(hook); }

    /// Handles one message. False once the channel is closed or overflowed;
    /// true on timeout or after a response.
    bool serve_one(std::chrono::milliseconds timeout);

    /// Loops serve_one until the channel closes or stop() returns true.
    void serve(const std::function<bool()>& stop, std::chrono::milliseconds poll = std::chrono::milliseconds(100));

    const SessionState& state() const { return state_; }

private:
    ControlResponse handle(std::string_view message);

    ControlChannel& channel_;
    ServerContext ctx_;
    SessionState state_;
    std::optional<std::uint32_t> last_cseq_;
    TransitionHook hook_;
};

class ControlError : public std::runtime_error {
public:
    enum class Kind { Timeout, RemoteError, Protocol, Closed };

    ControlError(Kind kind, const std::string& what, Status status = Status::Ok)
        : std::runtime_error(what)
        , kind_(kind)
        , status_(status)
    {
    }

    Kind kind() const { return kind_; }
    /// Remote status for RemoteError.
    Status status() const { return status_; }

private:
    Kind kind_;
    Status status_;
};

class ControlClient {
public:
    ControlClient(ControlChannel& channel, const KeyProvider& key_provider,
                  std::chrono::milliseconds timeout = std::chrono::seconds(5), std::string peer_identity = {});

    /// Sends SETUP with a fresh master salt and derives the same session keys
    /// the server holds.
    SessionKeys setup(const std::string& uri, std::uint16_t rtp_port);
    void play();
    void pause();
    void teardown();

    /// Local view of the remote state, updated on each 200.
    SessionPhase phase() const { return phase_; }
    std::optional<SessionId> session_id() const { return session_id_; }
    const std::optional<SessionKeys>& keys() const { return keys_; }

private:
    ControlResponse exchange(ControlRequest request);

    ControlChannel& channel_;
    const KeyProvider& key_provider_;
    std::chrono::milliseconds timeout_;
    std::string peer_identity_;
    std::uint32_t next_cseq_ = 1;
    std::string uri_;
    SessionPhase phase_ = SessionPhase::Init;
    std::optional<SessionId> session_id_;
    std::optional<SessionKeys> keys_;
};

} // namespace vsrtp

#endif // VSRTP_SESSION_HPP
