#ifndef VSRTP_RTP_HPP
#define VSRTP_RTP_HPP

#include "vsrtp/bytes.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <vector>

namespace vsrtp {

inline constexpr std::size_t kRtpHeaderSize = 12;
inline constexpr std::size_t kDefaultMtuPayload = 1200;
inline constexpr std::uint32_t kVideoClockRate = 90000;
inline constexpr std::uint8_t kDefaultPayloadType = 96;

/// RTP fixed header. This profile uses no padding, extensions or CSRCs.
struct RtpHeader {
    std::uint8_t version = 2;
    bool padding = false;
    bool extension = false;
    std::uint8_t csrc_count = 0;
    bool marker = false;
    std::uint8_t payload_type = kDefaultPayloadType;
    std::uint16_t sequence_number = 0;
    std::uint32_t timestamp = 0;
    std::uint32_t ssrc = 0;

    friend bool operator==(const RtpHeader&, const RtpHeader&) = default;
};

enum class PacketStatus {
    Ok,
    TooShort,
    BadVersion,
    /// Padding, extension or CSRC bits set.
    UnsupportedHeader,
    AuthFailure,
    ReplayDrop,
};

const char* to_string(PacketStatus status);

/// V(2) P(1) X(1) CC(4) | M(1) PT(7) | seq(16) | timestamp(32) | ssrc(32),
/// network byte order.
ByteArray<kRtpHeaderSize> serialize_header(const RtpHeader& h);

struct HeaderParse {
    PacketStatus status = PacketStatus::Ok;
    RtpHeader header;
};

HeaderParse parse_header(ByteView wire);

struct Fragment {
    ByteView payload;
    bool marker = false;
};

/// Splits a frame into consecutive slices of at most mtu_payload bytes. Only
/// the last slice carries the marker; an empty frame yields one empty marked
/// slice. The slices view `frame`, which must outlive them.
std::vector<Fragment> fragment_frame(ByteView frame, std::size_t mtu_payload = kDefaultMtuPayload);

/// Number of slices fragment_frame() returns for a frame of `frame_size` bytes.
std::size_t fragment_count(std::size_t frame_size, std::size_t mtu_payload = kDefaultMtuPayload);

/// Fragments of one frame, keyed by extended packet index.
struct FrameBuffer {
    std::uint32_t frame_id = 0;
    std::map<std::uint64_t, Bytes> fragments;
    std::optional<std::uint64_t> marker_index;
    bool complete = false;
};

struct CompletedFrame {
    std::uint32_t timestamp = 0;
    std::uint64_t first_index = 0;
    std::uint64_t last_index = 0;
    Bytes data;
};

struct ReassemblyStats {
    std::uint64_t frames_emitted = 0;
    std::uint64_t frames_dropped = 0;
    std::uint64_t stale_fragments = 0;
    std::uint64_t duplicate_fragments = 0;
};

// Reassembles frames from authenticated fragments.
//
// A frame is complete once its marker fragment has arrived and every index
// from its first fragment to the marker is present. The first fragment of a
// frame is the one immediately after the previous frame's marker (or the
// stream's first index), so a lost marker also makes the following frame
// unverifiable. When a frame completes, every pending older frame is
// abandoned; partial frames are never emitted.
class Reassembler {
public:
    explicit Reassembler(std::uint64_t first_index = 0, std::size_t max_pending = 64);

    std::vector<CompletedFrame> push(const RtpHeader& header, std::uint64_t index, Bytes payload);

    /// Drops everything still pending, counting it as dropped frames.
    void flush();

    const ReassemblyStats& stats() const { return stats_; }
    std::size_t pending_frames() const { return pending_.size(); }

private:
    bool start_known(std::uint64_t lowest) const;
    bool is_complete(const FrameBuffer& fb) const;
    void remember_marker(std::uint64_t index);
    std::vector<CompletedFrame> collect_complete();

    std::uint64_t first_index_;
    std::size_t max_pending_;
    // Keyed by RTP timestamp. Map order is raw numeric order; anything that
    // needs age order goes through timestamp_newer().
    std::map<std::uint32_t, FrameBuffer> pending_;
    std::set<std::uint64_t> markers_;
    std::optional<std::uint32_t> horizon_;
    ReassemblyStats stats_;
};

/// True if timestamp a is newer than b under 32-bit serial arithmetic.
inline bool timestamp_newer(std::uint32_t a, std::uint32_t b)
{
    return static_cast<std::int32_t>(a - b) > 0;
}

} // namespace vsrtp

#endif // VSRTP_RTP_HPP
