#ifndef VSRTP_CONTROL_CHANNEL_HPP
#define VSRTP_CONTROL_CHANNEL_HPP

#include <chrono>
#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>

// Reliable byte-stream transports for control messages. Messages are framed
// by the blank line that ends every request and response. A TLS wrapper would
// implement the same interface.

namespace vsrtp {

class ChannelError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct ChannelReceive {
    enum class Status { Ok, Timeout, Closed, Overflow };

    Status status = Status::Ok;
    std::string message;
};

class ControlChannel {
public:
    virtual ~ControlChannel() = default;

    virtual void send_message(std::string_view message) = 0;
    virtual ChannelReceive receive_message(std::chrono::milliseconds timeout) = 0;
    virtual void close() = 0;
};

/// Accumulates stream bytes and cuts complete messages at CRLF CRLF.
class MessageFramer {
public:
    void append(std::string_view bytes) { buffer_.append(bytes); }

    /// Next complete message, if one is buffered.
    std::optional<std::string> next();

    /// True when the buffer exceeds the control message limit without a
    /// terminator.
    bool overflowed() const;

private:
    std::string buffer_;
};

/// Two connected in-process endpoints.
std::pair<std::unique_ptr<ControlChannel>, std::unique_ptr<ControlChannel>> make_control_pipe();

class TcpControlChannel final : public ControlChannel {
public:
    /// Takes ownership of a connected socket.
    explicit TcpControlChannel(int fd);
    ~TcpControlChannel() override;

    TcpControlChannel(const TcpControlChannel&) = delete;
    TcpControlChannel& operator=(const TcpControlChannel&) = delete;

    static std::unique_ptr<TcpControlChannel> connect(const std::string& host, std::uint16_t port,
                                                      std::chrono::milliseconds timeout);

    void send_message(std::string_view message) override;
    ChannelReceive receive_message(std::chrono::milliseconds timeout) override;
    void close() override;

    std::string peer_address() const;

private:
    int fd_;
    MessageFramer framer_;
};

class TcpListener {
public:
    /// Binds and listens; port 0 picks an ephemeral port.
    TcpListener(const std::string& host, std::uint16_t port);
    ~TcpListener();

    TcpListener(const TcpListener&) = delete;
    TcpListener& operator=(const TcpListener&) = delete;

    std::uint16_t port() const { return port_; }

    /// nullptr on timeout.
    std::unique_ptr<TcpControlChannel> accept(std::chrono::milliseconds timeout);

private:
    int fd_;
    std::uint16_t port_;
};

} // namespace vsrtp

#endif // VSRTP_CONTROL_CHANNEL_HPP
