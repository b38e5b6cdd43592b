#include "vsrtp/control_channel.hpp"
#include "vsrtp/control.hpp"

#include "socket_util.hpp"

#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <condition_variable>
#include <fcntl.h>
#include <mutex>

namespace vsrtp {

std::optional<std::string> MessageFramer::next()
{
    const std::size_t end = buffer_.find("\r\n\r\n");
    if (end == std::string::npos) {
        return std::nullopt;
    }
    std::string message = buffer_.substr(0, end + 4);
    buffer_.erase(0, end + 4);
    return message;
}

bool MessageFramer::overflowed() const
{
    return buffer_.size() > kMaxControlMessage && buffer_.find("\r\n\r\n") == std::string::npos;
}

namespace {

struct PipeDirection {
    std::mutex mutex;
    std::condition_variable cv;
    std::string bytes;
    bool closed = false;
};

struct PipeState {
    PipeDirection dir[2];
};

class PipeEndpoint final : public ControlChannel {
public:
    PipeEndpoint(std::shared_ptr<PipeState> state, int side)
        : state_(std::move(state))
        , out_(state_->dir[side])
        , in_(state_->dir[1 - side])
    {
    }

    ~PipeEndpoint() override { close(); }

    void send_message(std::string_view message) override
    {
        std::lock_guard lock(out_.mutex);
        if (out_.closed) {
            throw ChannelError("control pipe closed");
        }
        out_.bytes.append(message);
        out_.cv.notify_all();
    }

    ChannelReceive receive_message(std::chrono::milliseconds timeout) override
    {
        ChannelReceive result;
        if (auto m = framer_.next()) {
            result.message = std::move(*m);
            return result;
        }
        std::unique_lock lock(in_.mutex);
        const auto deadline = std::chrono::steady_clock::now() + timeout;
        for (;;) {
            if (!in_.bytes.empty()) {
                framer_.append(in_.bytes);
                in_.bytes.clear();
                if (auto m = framer_.next()) {
                    result.message = std::move(*m);
                    return result;
                }
                if (framer_.overflowed()) {
                    result.status = ChannelReceive::Status::Overflow;
                    return result;
                }
            }
            if (in_.closed) {
                result.status = ChannelReceive::Status::Closed;
                return result;
            }
            if (in_.cv.wait_until(lock, deadline) == std::cv_status::timeout && in_.bytes.empty() && !in_.closed) {
                result.status = ChannelReceive::Status::Timeout;
                return result;
            }
        }
    }

    void close() override
    {
        for (PipeDirection* d : { &out_, &in_ }) {
            std::lock_guard lock(d->mutex);
            d->closed = true;
            d->cv.notify_all();
        }
    }

private:
    std::shared_ptr<PipeState> state_;
    PipeDirection& out_;
    PipeDirection& in_;
    MessageFramer framer_;
};

} // namespace

std::pair<std::unique_ptr<ControlChannel>, std::unique_ptr<ControlChannel>> make_control_pipe()
{
    auto state = std::make_shared<PipeState>();
    return { std::make_unique<PipeEndpoint>(state, 0), std::make_unique<PipeEndpoint>(state, 1) };
}

// TCP

TcpControlChannel::TcpControlChannel(int fd)
    : fd_(fd)
{
    const int one = 1;
    ::setsockopt(fd_, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
}

TcpControlChannel::~TcpControlChannel()
{
    close();
}

std::unique_ptr<TcpControlChannel> TcpControlChannel::connect(const std::string& host, std::uint16_t port,
                                                              std::chrono::milliseconds timeout)
{
    const sockaddr_in addr = detail::resolve_ipv4(host, port);
    const auto deadline = std::chrono::steady_clock::now() + timeout;
    // Retry refused connections until the deadline; the server may still be
    // starting.
    for (;;) {
        const int fd = ::socket(AF_INET, SOCK_STREAM | SOCK_CLOEXEC, 0);
        if (fd < 0) {
            detail::throw_errno("socket");
        }
        if (::connect(fd, reinterpret_cast<const sockaddr*>(&addr), sizeof(addr)) == 0) {
            return std::make_unique<TcpControlChannel>(fd);
        }
        const int err = errno;
        ::close(fd);
        if (std::chrono::steady_clock::now() >= deadline) {
            errno = err;
            detail::throw_errno("connect to " + detail::format_address(addr));
        }
        ::usleep(20000);
    }
}

void TcpControlChannel::send_message(std::string_view message)
{
    if (fd_ < 0) {
        throw ChannelError("control connection closed");
    }
    while (!message.empty()) {
        const ssize_t n = ::send(fd_, message.data(), message.size(), MSG_NOSIGNAL);
        if (n < 0) {
            if (errno == EINTR) {
                continue;
            }
            throw ChannelError("control send failed");
        }
        message.remove_prefix(static_cast<std::size_t>(n));
    }
}

ChannelReceive TcpControlChannel::receive_message(std::chrono::milliseconds timeout)
{
    ChannelReceive result;
    const auto deadline = std::chrono::steady_clock::now() + timeout;
    for (;;) {
        if (auto m = framer_.next()) {
            result.message = std::move(*m);
            return result;
        }
        if (framer_.overflowed()) {
            result.status = ChannelReceive::Status::Overflow;
            return result;
        }
        if (fd_ < 0) {
            result.status = ChannelReceive::Status::Closed;
            return result;
        }
        const auto left =
            std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
        if (left.count() <= 0 || !detail::wait_readable(fd_, left)) {
            result.status = ChannelReceive::Status::Timeout;
            return result;
        }
        char buf[4096];
        const ssize_t n = ::recv(fd_, buf, sizeof(buf), 0);
        if (n < 0 && errno == EINTR) {
            continue;
        }
        if (n <= 0) {
            result.status = ChannelReceive::Status::Closed;
            return result;
        }
        framer_.append({ buf, static_cast<std::size_t>(n) });
    }
}

void TcpControlChannel::close()
{
    if (fd_ >= 0) {
        ::shutdown(fd_, SHUT_RDWR);
        ::close(fd_);
        fd_ = -1;
    }
}

std::string TcpControlChannel::peer_address() const
{
    sockaddr_in addr {};
    socklen_t len = sizeof(addr);
    if (fd_ < 0 || ::getpeername(fd_, reinterpret_cast<sockaddr*>(&addr), &len) != 0) {
        return {};
    }
    return detail::format_address(addr);
}

TcpListener::TcpListener(const std::string& host, std::uint16_t port)
{
    const sockaddr_in addr = detail::resolve_ipv4(host, port);
    fd_ = ::socket(AF_INET, SOCK_STREAM | SOCK_CLOEXEC, 0);
    if (fd_ < 0) {
        detail::throw_errno("socket");
    }
    const int one = 1;
    ::setsockopt(fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
    if (::bind(fd_, reinterpret_cast<const sockaddr*>(&addr), sizeof(addr)) != 0 || ::listen(fd_, 8) != 0) {
        const int err = errno;
        ::close(fd_);
        errno = err;
        detail::throw_errno("listen on " + detail::format_address(addr));
    }
    sockaddr_in bound {};
    socklen_t len = sizeof(bound);
    ::getsockname(fd_, reinterpret_cast<sockaddr*>(&bound), &len);
    port_ = ntohs(bound.sin_port);
}

TcpListener::~TcpListener()
{
    ::close(fd_);
}

std::unique_ptr<TcpControlChannel> TcpListener::accept(std::chrono::milliseconds timeout)
{
    if (!detail::wait_readable(fd_, timeout)) {
        return nullptr;
    }
    const int fd = ::accept4(fd_, nullptr, nullptr, SOCK_CLOEXEC);
    if (fd < 0) {
        detail::throw_errno("accept");
    }
    return std::make_unique<TcpControlChannel>(fd);
}

} // namespace vsrtp
