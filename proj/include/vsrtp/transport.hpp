#ifndef VSRTP_TRANSPORT_HPP
#define VSRTP_TRANSPORT_HPP

#include "vsrtp/bytes.hpp"
#include "vsrtp/media.hpp"
#include "vsrtp/netsim.hpp"
#include "vsrtp/session.hpp"
#include "vsrtp/srtp.hpp"

#include <chrono>
#include <condition_variable>
#include <deque>
#include <functional>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>

namespace vsrtp {

inline constexpr std::size_t kMaxDatagram = 1452;

class TransportError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class OversizedDatagram : public TransportError {
public:
    using TransportError::TransportError;
};

class SocketClosed : public TransportError {
public:
    using TransportError::TransportError;
};

struct RecvResult {
    enum class Status { Ok, Timeout, Closed };

    Status status = Status::Ok;
    Bytes data;
};

/// One-way datagram path. send() may block for backpressure; recv() never
/// waits past its timeout.
class DatagramChannel {
public:
    explicit DatagramChannel(std::size_t max_datagram = kMaxDatagram)
        : max_datagram_(max_datagram)
    {
    }
    virtual ~DatagramChannel() = default;

    /// Throws OversizedDatagram or SocketClosed.
    void send(ByteView datagram);
    virtual RecvResult recv(std::chrono::milliseconds timeout) = 0;
    /// Sender side is done; receivers see Closed once drained.
    virtual void close() = 0;

    std::size_t max_datagram() const { return max_datagram_; }
    std::uint64_t datagrams_sent() const { return sent_; }
    std::size_t largest_sent() const { return largest_; }

protected:
    virtual void do_send(ByteView datagram) = 0;

private:
    std::size_t max_datagram_;
    std::uint64_t sent_ = 0;
    std::size_t largest_ = 0;
};

/// UDP unicast socket. A receiver binds; a sender binds an ephemeral port and
/// targets a remote address. There is no connection, so close() on the sender
/// is local only.
class UdpChannel final : public DatagramChannel {
public:
    static std::unique_ptr<UdpChannel> bind(const std::string& host, std::uint16_t port,
                                            std::size_t max_datagram = kMaxDatagram);
    static std::unique_ptr<UdpChannel> connect(const std::string& host, std::uint16_t port,
                                               std::size_t max_datagram = kMaxDatagram);
    ~UdpChannel() override;

    RecvResult recv(std::chrono::milliseconds timeout) override;
    void close() override;

    std::uint16_t local_port() const;

private:
    UdpChannel(int fd, std::size_t max_datagram);
    void do_send(ByteView datagram) override;

    int fd_;
    bool closed_ = false;
};

/// In-process queue shared by one sender thread and one receiver thread.
/// send() blocks while `capacity` datagrams are queued.
class LoopbackChannel final : public DatagramChannel {
public:
    explicit LoopbackChannel(std::size_t capacity = 4096, std::size_t max_datagram = kMaxDatagram);

    RecvResult recv(std::chrono::milliseconds timeout) override;
    void close() override;

private:
    void do_send(ByteView datagram) override;

    std::size_t capacity_;
    std::mutex mutex_;
    std::condition_variable not_empty_;
    std::condition_variable not_full_;
    std::deque<Bytes> queue_;
    bool closed_ = false;
};

/// Records everything sent; on close() runs the fault model over the trace
/// and serves the resulting schedule to recv() in delivery order.
class SimulatedChannel final : public DatagramChannel {
public:
    explicit SimulatedChannel(FaultModel model, std::size_t max_datagram = kMaxDatagram);

    RecvResult recv(std::chrono::milliseconds timeout) override;
    void close() override;

    /// Available after close().
    const std::vector<Bytes>& trace() const { return trace_; }
    const std::vector<Delivery>& schedule() const { return schedule_; }

private:
    void do_send(ByteView datagram) override;

    FaultModel model_;
    std::mutex mutex_;
    std::condition_variable cv_;
    std::vector<Bytes> trace_;
    std::vector<Delivery> schedule_;
    std::size_t next_ = 0;
    bool closed_ = false;
};

struct PacingPolicy {
    double target_fps = 30.0;
    /// Packets released back-to-back; a larger frame is spread in groups over
    /// its frame interval. 0 means no limit.
    std::size_t burst = 0;

    void validate() const;
};

struct StreamOptions {
    Codec codec = Codec::Jpeg;
    int quality = kDefaultJpegQuality;
    bool base64 = true;
    std::size_t mtu_payload = kDefaultMtuPayload;
    /// Unpaced when empty.
    std::optional<PacingPolicy> pacing;
    std::size_t max_frames = 0;
    /// Checked before each frame; streaming stops once it returns false.
    std::function<bool()> active;
    /// Called after each frame is sent.
    std::function<void(std::size_t frame, std::uint32_t timestamp, ByteView payload)> on_frame;
};

struct FrameTiming {
    std::size_t frame = 0;
    std::uint32_t timestamp = 0;
    std::chrono::nanoseconds encode { 0 };
    std::chrono::nanoseconds encrypt { 0 };
    std::chrono::nanoseconds tag { 0 };
    /// Encode through the last datagram handed to the channel.
    std::chrono::nanoseconds total { 0 };
    std::size_t payload_bytes = 0;
    std::size_t packets = 0;
    /// Time of the first send, from the start of the stream.
    std::chrono::nanoseconds released { 0 };
};

struct StreamStats {
    std::vector<FrameTiming> frames;
    std::uint64_t packets_sent = 0;
    std::uint64_t bytes_sent = 0;
    std::chrono::nanoseconds wall { 0 };
};

/// encode, fragment, protect, send for each frame of the source.
StreamStats stream_frames(FrameSource& source, PacketSender& sender, DatagramChannel& channel,
                          const StreamOptions& options);

/// Same, from a negotiated session. Throws std::logic_error unless the
/// session is Playing with keys.
StreamStats stream_session(FrameSource& source, const SessionState& session, DatagramChannel& channel,
                           StreamOptions options, IvMode mode = IvMode::UniquePerPacket, bool secured = true,
                           std::uint32_t ssrc = 0);

struct ReceiverOptions {
    Codec codec = Codec::Jpeg;
    bool base64 = true;
    Resolution resolution = k720p;
    IvMode mode = IvMode::UniquePerPacket;
    bool secured = true;
    /// Decode reassembled payloads; off keeps only payload bytes.
    bool decode = true;
};

struct ReceivedFrame {
    std::uint32_t timestamp = 0;
    Bytes payload;
    std::optional<Frame> frame;
    std::chrono::nanoseconds arrival { 0 };
};

struct ReceiverStats {
    std::uint64_t datagrams = 0;
    std::uint64_t accepted = 0;
    std::uint64_t auth_failures = 0;
    std::uint64_t replay_drops = 0;
    std::uint64_t malformed = 0;
    std::uint64_t frames_ok = 0;
    std::uint64_t frames_corrupt = 0;
    ReassemblyStats reassembly;
};

class StreamReceiver {
public:
    StreamReceiver(const SessionKeys& keys, ReceiverOptions options);

    /// Frames completed by this datagram; `arrival` is stamped on them.
    std::vector<ReceivedFrame> on_datagram(ByteView datagram, std::chrono::nanoseconds arrival);
    /// Abandons pending partial frames.
    void finish();

    ReceiverStats stats() const;

private:
    ReceiverOptions options_;
    Unprotector unprotector_;
    Reassembler reassembler_;
    ReceiverStats stats_;
};

/// Pulls from the channel until it closes, `idle` passes without a datagram,
/// or `max_frames` frames (0 = no limit) have arrived.
void run_receiver(DatagramChannel& channel, StreamReceiver& receiver,
                  const std::function<void(const ReceivedFrame&)>& on_frame,
                  std::chrono::milliseconds idle = std::chrono::seconds(2), std::size_t max_frames = 0);

} // namespace vsrtp

#endif // VSRTP_TRANSPORT_HPP
