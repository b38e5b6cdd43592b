#ifndef VSRTP_SRTP_HPP
#define VSRTP_SRTP_HPP

#include "vsrtp/crypto.hpp"
#include "vsrtp/rtp.hpp"

#include <chrono>
#include <functional>
#include <optional>

// Protected packet = RTP header (cleartext) || AES-CTR ciphertext ||
// 32-byte HMAC-SHA-256 tag over header || ciphertext.

namespace vsrtp {

inline constexpr std::size_t kPacketOverhead = kRtpHeaderSize + kAuthTagSize;

/// Sliding window over extended packet indices (64 entries).
class ReplayWindow {
public:
    static constexpr std::uint64_t kSize = 64;

    enum class Verdict { Fresh, Duplicate, Stale };

    Verdict check(std::uint64_t index) const;
    void commit(std::uint64_t index);

    std::optional<std::uint64_t> highest() const { return highest_; }

private:
    std::optional<std::uint64_t> highest_;
    // Bit i set: index highest_ - i has been accepted.
    std::uint64_t seen_ = 0;
};

/// Reconstructs the 48-bit index from a sequence number, choosing the
/// rollover counter that puts it closest to the highest verified index.
/// Returns nullopt if the nearest candidate would be negative.
std::optional<std::uint64_t> estimate_packet_index(std::optional<std::uint64_t> highest, std::uint16_t sequence_number);

/// Time spent inside the cipher and the MAC for one call.
struct ProtectTiming {
    std::chrono::nanoseconds encrypt { 0 };
    std::chrono::nanoseconds tag { 0 };
};

// Sender-side packet protection. With secured = false the cipher and MAC are
// replaced by a copy and a zero tag so the data movement stays the same.
class Protector {
public:
    Protector(const SessionKeys& keys, IvMode mode, bool secured = true);

    /// header.sequence_number and header.ssrc must match pkt.
    void protect_into(const RtpHeader& header, const PacketIndex& pkt, ByteView payload, Bytes& wire,
                      ProtectTiming* timing = nullptr);

    Bytes protect(const RtpHeader& header, const PacketIndex& pkt, ByteView payload);

    bool secured() const { return secured_; }
    IvMode mode() const { return mode_; }

private:
    SessionKeys keys_;
    IvMode mode_;
    bool secured_;
    CtrCipher cipher_;
    HmacSha256 mac_;
};

struct UnprotectResult {
    PacketStatus status = PacketStatus::Ok;
    RtpHeader header;
    std::uint64_t index = 0;
    Bytes payload;

    bool ok() const { return status == PacketStatus::Ok; }
};

// Receiver-side verification and decryption. Replay and staleness are
// checked before the tag, the tag before decryption; the replay window only
// advances on packets that verified.
class Unprotector {
public:
    Unprotector(const SessionKeys& keys, IvMode mode, bool secured = true, const ReplayWindow& window = {});

    UnprotectResult unprotect(ByteView wire);

    const ReplayWindow& window() const { return window_; }
    bool secured() const { return secured_; }

private:
    SessionKeys keys_;
    IvMode mode_;
    bool secured_;
    ReplayWindow window_;
    CtrCipher cipher_;
    HmacSha256 mac_;
};

Bytes protect(const SessionKeys& keys, const PacketIndex& pkt, const RtpHeader& header, ByteView payload,
              IvMode mode);

UnprotectResult unprotect(const SessionKeys& keys, ByteView wire, ReplayWindow& window, IvMode mode);

/// Sender context for one RTP stream: owns the packet counter and turns
/// frames into protected datagrams.
class PacketSender {
public:
    PacketSender(const SessionKeys& keys, IvMode mode, std::uint32_t ssrc, bool secured = true,
                 std::uint64_t first_index = 0, std::uint8_t payload_type = kDefaultPayloadType);

    /// Fragments and protects one frame; every fragment shares `timestamp`.
    std::vector<Bytes> packetize(ByteView frame, std::uint32_t timestamp, std::size_t mtu_payload,
                                 ProtectTiming* timing = nullptr);

    /// Same packets as packetize(), handed to `emit` one at a time from a
    /// reused buffer. The view is only valid during the call. Returns the
    /// packet count.
    std::size_t packetize_each(ByteView frame, std::uint32_t timestamp, std::size_t mtu_payload,
                               const std::function<void(ByteView)>& emit, ProtectTiming* timing = nullptr);

    std::uint64_t next_index() const { return next_index_; }
    std::uint32_t ssrc() const { return ssrc_; }

private:
    Protector protector_;
    std::uint32_t ssrc_;
    std::uint64_t next_index_;
    std::uint8_t payload_type_;
};

} // namespace vsrtp

#endif // VSRTP_SRTP_HPP
