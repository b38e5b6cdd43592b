#include "vsrtp/transport.hpp"

#include "socket_util.hpp"

#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cmath>
#include <thread>

namespace vsrtp {

namespace {

using Clock = std::chrono::steady_clock;

} // namespace

void DatagramChannel::send(ByteView datagram)
{
    if (datagram.size() > max_datagram_) {
        throw OversizedDatagram("datagram of " + std::to_string(datagram.size()) + " bytes exceeds " +
                                std::to_string(max_datagram_));
    }
    do_send(datagram);
    ++sent_;
    largest_ = std::max(largest_, datagram.size());
}

// UdpChannel

UdpChannel::UdpChannel(int fd, std::size_t max_datagram)
    : DatagramChannel(max_datagram)
    , fd_(fd)
{
    int size = 8 << 20;
    ::setsockopt(fd_, SOL_SOCKET, SO_RCVBUFFORCE, &size, sizeof(size));
    ::setsockopt(fd_, SOL_SOCKET, SO_RCVBUF, &size, sizeof(size));
    ::setsockopt(fd_, SOL_SOCKET, SO_SNDBUF, &size, sizeof(size));
}

UdpChannel::~UdpChannel()
{
    ::close(fd_);
}

std::unique_ptr<UdpChannel> UdpChannel::bind(const std::string& host, std::uint16_t port, std::size_t max_datagram)
{
    const sockaddr_in addr = detail::resolve_ipv4(host, port);
    const int fd = ::socket(AF_INET, SOCK_DGRAM | SOCK_CLOEXEC, 0);
    if (fd < 0) {
        detail::throw_errno("socket");
    }
    if (::bind(fd, reinterpret_cast<const sockaddr*>(&addr), sizeof(addr)) != 0) {
        const int err = errno;
        ::close(fd);
        errno = err;
        detail::throw_errno("bind " + detail::format_address(addr));
    }
    return std::unique_ptr<UdpChannel>(new UdpChannel(fd, max_datagram));
}

std::unique_ptr<UdpChannel> UdpChannel::connect(const std::string& host, std::uint16_t port, std::size_t max_datagram)
{
    const sockaddr_in addr = detail::resolve_ipv4(host, port);
    const int fd = ::socket(AF_INET, SOCK_DGRAM | SOCK_CLOEXEC, 0);
    if (fd < 0) {
        detail::throw_errno("socket");
    }
    if (::connect(fd, reinterpret_cast<const sockaddr*>(&addr), sizeof(addr)) != 0) {
        const int err = errno;
        ::close(fd);
        errno = err;
        detail::throw_errno("connect " + detail::format_address(addr));
    }
    return std::unique_ptr<UdpChannel>(new UdpChannel(fd, max_datagram));
}

void UdpChannel::do_send(ByteView datagram)
{
    if (closed_) {
        throw SocketClosed("UDP channel closed");
    }
    for (;;) {
        const ssize_t n = ::send(fd_, datagram.data(), datagram.size(), 0);
        if (n >= 0) {
            return;
        }
        if (errno == EINTR) {
            continue;
        }
        // Nobody listening yet: UDP gives no delivery promise, so drop.
        if (errno == ECONNREFUSED) {
            return;
        }
        if (errno == ENOBUFS || errno == EAGAIN) {
            std::this_thread::sleep_for(std::chrono::microseconds(50));
            continue;
        }
        detail::throw_errno("UDP send");
    }
}

RecvResult UdpChannel::recv(std::chrono::milliseconds timeout)
{
    RecvResult result;
    if (closed_) {
        result.status = RecvResult::Status::Closed;
        return result;
    }
    if (!detail::wait_readable(fd_, timeout)) {
        result.status = RecvResult::Status::Timeout;
        return result;
    }
    result.data.resize(65536);
    for (;;) {
        const ssize_t n = ::recv(fd_, result.data.data(), result.data.size(), 0);
        if (n >= 0) {
            result.data.resize(static_cast<std::size_t>(n));
            return result;
        }
        if (errno == EINTR) {
            continue;
        }
        if (errno == ECONNREFUSED || errno == EAGAIN) {
            result.data.clear();
            result.status = RecvResult::Status::Timeout;
            return result;
        }
        detail::throw_errno("UDP recv");
    }
}

void UdpChannel::close()
{
    closed_ = true;
}

std::uint16_t UdpChannel::local_port() const
{
    sockaddr_in addr {};
    socklen_t len = sizeof(addr);
    ::getsockname(fd_, reinterpret_cast<sockaddr*>(&addr), &len);
    return ntohs(addr.sin_port);
}

// LoopbackChannel

LoopbackChannel::LoopbackChannel(std::size_t capacity, std::size_t max_datagram)
    : DatagramChannel(max_datagram)
    , capacity_(std::max<std::size_t>(capacity, 1))
{
}

void LoopbackChannel::do_send(ByteView datagram)
{
    std::unique_lock lock(mutex_);
    not_full_.wait(lock, [&] { return closed_ || queue_.size() < capacity_; });
    if (closed_) {
        throw SocketClosed("loopback channel closed");
    }
    queue_.emplace_back(datagram.begin(), datagram.end());
    if (queue_.size() == 1) {
        not_empty_.notify_all();
    }
}

RecvResult LoopbackChannel::recv(std::chrono::milliseconds timeout)
{
    RecvResult result;
    std::unique_lock lock(mutex_);
    if (!not_empty_.wait_for(lock, timeout, [&] { return closed_ || !queue_.empty(); })) {
        result.status = RecvResult::Status::Timeout;
        return result;
    }
    if (queue_.empty()) {
        result.status = RecvResult::Status::Closed;
        return result;
    }
    result.data = std::move(queue_.front());
    queue_.pop_front();
    // A blocked sender is woken only once half the queue has drained, so a
    // single core does not switch threads on every datagram.
    if (queue_.size() == capacity_ / 2) {
        not_full_.notify_all();
    }
    return result;
}

void LoopbackChannel::close()
{
    std::lock_guard lock(mutex_);
    closed_ = true;
    not_empty_.notify_all();
    not_full_.notify_all();
}

// SimulatedChannel

SimulatedChannel::SimulatedChannel(FaultModel model, std::size_t max_datagram)
    : DatagramChannel(max_datagram)
    , model_(model)
{
    model_.validate();
}

void SimulatedChannel::do_send(ByteView datagram)
{
    std::lock_guard lock(mutex_);
    if (closed_) {
        throw SocketClosed("simulated channel closed");
    }
    trace_.emplace_back(datagram.begin(), datagram.end());
}

void SimulatedChannel::close()
{
    std::lock_guard lock(mutex_);
    if (closed_) {
        return;
    }
    schedule_ = simulate(trace_, model_);
    closed_ = true;
    cv_.notify_all();
}

RecvResult SimulatedChannel::recv(std::chrono::milliseconds timeout)
{
    RecvResult result;
    std::unique_lock lock(mutex_);
    if (!cv_.wait_for(lock, timeout, [&] { return closed_; })) {
        result.status = RecvResult::Status::Timeout;
        return result;
    }
    if (next_ >= schedule_.size()) {
        result.status = RecvResult::Status::Closed;
        return result;
    }
    result.data = schedule_[next_++].data;
    return result;
}

// Sending

void PacingPolicy::validate() const
{
    if (!(target_fps > 0) || !std::isfinite(target_fps)) {
        throw std::invalid_argument("target fps must be positive");
    }
}

StreamStats stream_frames(FrameSource& source, PacketSender& sender, DatagramChannel& channel,
                          const StreamOptions& options)
{
    if (options.pacing) {
        options.pacing->validate();
    }
    StreamStats stats;
    const auto start = Clock::now();
    for (std::size_t k = 0; options.max_frames == 0 || k < options.max_frames; ++k) {
        if (options.active && !options.active()) {
            break;
        }
        std::optional<Frame> frame = source.next();
        if (!frame) {
            break;
        }
        std::chrono::nanoseconds frame_interval { 0 };
        if (options.pacing) {
            frame_interval = std::chrono::nanoseconds(static_cast<std::int64_t>(1e9 / options.pacing->target_fps));
            std::this_thread::sleep_until(start + std::chrono::nanoseconds(static_cast<std::int64_t>(
                                                      static_cast<double>(k) * 1e9 / options.pacing->target_fps)));
        }

        FrameTiming t;
        t.frame = k;
        t.timestamp = frame->capture_ts;
        const auto t0 = Clock::now();
        const EncodedFrame encoded = encode_frame(*frame, options.codec, options.quality, options.base64);
        const auto t1 = Clock::now();
        ProtectTiming pt;
        const std::size_t count = fragment_count(encoded.payload.size(), options.mtu_payload);
        const std::size_t burst = options.pacing && options.pacing->burst > 0 ? options.pacing->burst : count;
        const std::size_t groups = (count + burst - 1) / burst;
        std::chrono::nanoseconds slept { 0 };
        const auto send_start = Clock::now();
        std::size_t i = 0;
        sender.packetize_each(
            encoded.payload, t.timestamp, options.mtu_payload,
            [&](ByteView wire) {
                if (i > 0 && i % burst == 0) {
                    const auto due = send_start + frame_interval * static_cast<std::int64_t>(i / burst) /
                                                      static_cast<std::int64_t>(groups);
                    const auto before = Clock::now();
                    std::this_thread::sleep_until(due);
                    slept += Clock::now() - before;
                }
                channel.send(wire);
                stats.bytes_sent += wire.size();
                ++i;
            },
            &pt);
        const auto t2 = Clock::now();

        t.encode = t1 - t0;
        t.encrypt = pt.encrypt;
        t.tag = pt.tag;
        t.total = t2 - t0 - slept;
        t.payload_bytes = encoded.payload.size();
        t.packets = count;
        t.released = send_start - start;
        stats.packets_sent += count;
        stats.frames.push_back(t);
        if (options.on_frame) {
            options.on_frame(k, t.timestamp, encoded.payload);
        }
    }
    if (options.pacing) {
        // A paced stream of n frames occupies n frame intervals.
        std::this_thread::sleep_until(start + std::chrono::nanoseconds(static_cast<std::int64_t>(
                                                  static_cast<double>(stats.frames.size()) * 1e9 /
                                                  options.pacing->target_fps)));
    }
    stats.wall = Clock::now() - start;
    return stats;
}

StreamStats stream_session(FrameSource& source, const SessionState& session, DatagramChannel& channel,
                           StreamOptions options, IvMode mode, bool secured, std::uint32_t ssrc)
{
    if (session.phase != SessionPhase::Playing || !session.keys) {
        throw std::logic_error("media can only be sent from a Playing session with keys");
    }
    PacketSender sender(*session.keys, mode, ssrc != 0 ? ssrc : random_u32(), secured);
    return stream_frames(source, sender, channel, options);
}

// Receiving

StreamReceiver::StreamReceiver(const SessionKeys& keys, ReceiverOptions options)
    : options_(options)
    , unprotector_(keys, options.mode, options.secured)
{
}

std::vector<ReceivedFrame> StreamReceiver::on_datagram(ByteView datagram, std::chrono::nanoseconds arrival)
{
    ++stats_.datagrams;
    UnprotectResult r = unprotector_.unprotect(datagram);
    switch (r.status) {
    case PacketStatus::Ok:
        break;
    case PacketStatus::AuthFailure:
        ++stats_.auth_failures;
        return {};
    case PacketStatus::ReplayDrop:
        ++stats_.replay_drops;
        return {};
    default:
        ++stats_.malformed;
        return {};
    }
    ++stats_.accepted;

    std::vector<ReceivedFrame> out;
    for (CompletedFrame& c : reassembler_.push(r.header, r.index, std::move(r.payload))) {
        ReceivedFrame f;
        f.timestamp = c.timestamp;
        f.arrival = arrival;
        if (options_.decode) {
            EncodedFrame e;
            e.codec = options_.codec;
            e.base64_wrapped = options_.base64;
            e.width = options_.resolution.width;
            e.height = options_.resolution.height;
            e.payload = std::move(c.data);
            try {
                f.frame = decode_frame(e);
            } catch (const CorruptPayload&) {
                ++stats_.frames_corrupt;
                continue;
            }
            f.frame->capture_ts = c.timestamp;
            f.payload = std::move(e.payload);
        } else {
            f.payload = std::move(c.data);
        }
        ++stats_.frames_ok;
        out.push_back(std::move(f));
    }
    return out;
}

void StreamReceiver::finish()
{
    reassembler_.flush();
}

ReceiverStats StreamReceiver::stats() const
{
    ReceiverStats s = stats_;
    s.reassembly = reassembler_.stats();
    return s;
}

void run_receiver(DatagramChannel& channel, StreamReceiver& receiver,
                  const std::function<void(const ReceivedFrame&)>& on_frame, std::chrono::milliseconds idle,
                  std::size_t max_frames)
{
    const auto start = Clock::now();
    std::size_t frames = 0;
    for (;;) {
        RecvResult in = channel.recv(idle);
        if (in.status != RecvResult::Status::Ok) {
            break;
        }
        for (const ReceivedFrame& f : receiver.on_datagram(in.data, Clock::now() - start)) {
            ++frames;
            if (on_frame) {
                on_frame(f);
            }
        }
        if (max_frames != 0 && frames >= max_frames) {
            break;
        }
    }
    receiver.finish();
}

} // namespace vsrtp
