#include "vsrtp/rtp.hpp"

#include <algorithm>
#include <stdexcept>

namespace vsrtp {

namespace {

constexpr std::size_t kMaxRememberedMarkers = 1024;

} // namespace

const char* to_string(PacketStatus status)
{
    switch (status) {
    case PacketStatus::Ok:
        return "ok";
    case PacketStatus::TooShort:
        return "too-short";
    case PacketStatus::BadVersion:
        return "bad-version";
    case PacketStatus::UnsupportedHeader:
        return "unsupported-header";
    case PacketStatus::AuthFailure:
        return "auth-failure";
    case PacketStatus::ReplayDrop:
        return "replay-drop";
    }
    return "?";
}

ByteArray<kRtpHeaderSize> serialize_header(const RtpHeader& h)
{
    ByteArray<kRtpHeaderSize> out {};
    out[0] = static_cast<std::uint8_t>(((h.version & 0x03) << 6) | (h.padding ? 0x20 : 0) | (h.extension ? 0x10 : 0) |
                                       (h.csrc_count & 0x0f));
    out[1] = static_cast<std::uint8_t>((h.marker ? 0x80 : 0) | (h.payload_type & 0x7f));
    put_be16(&out[2], h.sequence_number);
    put_be32(&out[4], h.timestamp);
    put_be32(&out[8], h.ssrc);
    return out;
}

HeaderParse parse_header(ByteView wire)
{
    HeaderParse result;
    if (wire.size() < kRtpHeaderSize) {
        result.status = PacketStatus::TooShort;
        return result;
    }
    RtpHeader& h = result.header;
    h.version = wire[0] >> 6;
    h.padding = (wire[0] & 0x20) != 0;
    h.extension = (wire[0] & 0x10) != 0;
    h.csrc_count = wire[0] & 0x0f;
    h.marker = (wire[1] & 0x80) != 0;
    h.payload_type = wire[1] & 0x7f;
    h.sequence_number = get_be16(&wire[2]);
    h.timestamp = get_be32(&wire[4]);
    h.ssrc = get_be32(&wire[8]);

    if (h.version != 2) {
        result.status = PacketStatus::BadVersion;
    } else if (h.padding || h.extension || h.csrc_count != 0) {
        result.status = PacketStatus::UnsupportedHeader;
    }
    return result;
}

std::vector<Fragment> fragment_frame(ByteView frame, std::size_t mtu_payload)
{
    if (mtu_payload == 0) {
        throw std::invalid_argument("mtu_payload must be at least 1");
    }
    std::vector<Fragment> out;
    if (frame.empty()) {
        out.push_back({ frame, true });
        return out;
    }
    out.reserve((frame.size() + mtu_payload - 1) / mtu_payload);
    for (std::size_t off = 0; off < frame.size(); off += mtu_payload) {
        const std::size_t len = std::min(mtu_payload, frame.size() - off);
        out.push_back({ frame.subspan(off, len), off + len == frame.size() });
    }
    return out;
}

std::size_t fragment_count(std::size_t frame_size, std::size_t mtu_payload)
{
    if (mtu_payload == 0) {
        throw std::invalid_argument("mtu_payload must be at least 1");
    }
    return frame_size == 0 ? 1 : (frame_size + mtu_payload - 1) / mtu_payload;
}

Reassembler::Reassembler(std::uint64_t first_index, std::size_t max_pending)
    : first_index_(first_index)
    , max_pending_(std::max<std::size_t>(max_pending, 1))
{
}

bool Reassembler::start_known(std::uint64_t lowest) const
{
    return lowest == first_index_ || (lowest > 0 && markers_.count(lowest - 1) != 0);
}

bool Reassembler::is_complete(const FrameBuffer& fb) const
{
    if (!fb.marker_index || fb.fragments.empty()) {
        return false;
    }
    const std::uint64_t lowest = fb.fragments.begin()->first;
    const std::uint64_t highest = fb.fragments.rbegin()->first;
    if (highest != *fb.marker_index || !start_known(lowest)) {
        return false;
    }
    return fb.fragments.size() == highest - lowest + 1;
}

void Reassembler::remember_marker(std::uint64_t index)
{
    markers_.insert(index);
    while (markers_.size() > kMaxRememberedMarkers) {
        markers_.erase(markers_.begin());
    }
}

std::vector<CompletedFrame> Reassembler::push(const RtpHeader& header, std::uint64_t index, Bytes payload)
{
    const std::uint32_t ts = header.timestamp;
    if (horizon_ && !timestamp_newer(ts, *horizon_)) {
        ++stats_.stale_fragments;
        return {};
    }

    auto [it, created] = pending_.try_emplace(ts);
    FrameBuffer& fb = it->second;
    fb.frame_id = ts;
    if (!fb.fragments.emplace(index, std::move(payload)).second) {
        ++stats_.duplicate_fragments;
        return {};
    }
    if (header.marker) {
        fb.marker_index = index;
        remember_marker(index);
    }

    if (created && pending_.size() > max_pending_) {
        // Evict the oldest pending frame.
        auto oldest = pending_.begin();
        for (auto p = pending_.begin(); p != pending_.end(); ++p) {
            if (timestamp_newer(oldest->first, p->first)) {
                oldest = p;
            }
        }
        horizon_ = oldest->first;
        pending_.erase(oldest);
        ++stats_.frames_dropped;
    }
    return collect_complete();
}

std::vector<CompletedFrame> Reassembler::collect_complete()
{
    std::vector<std::uint32_t> complete;
    for (auto& [ts, fb] : pending_) {
        fb.complete = is_complete(fb);
        if (fb.complete) {
            complete.push_back(ts);
        }
    }
    if (complete.empty()) {
        return {};
    }
    std::sort(complete.begin(), complete.end(), [](std::uint32_t a, std::uint32_t b) { return timestamp_newer(b, a); });
    const std::uint32_t newest = complete.back();

    std::vector<CompletedFrame> out;
    for (const std::uint32_t ts : complete) {
        FrameBuffer& fb = pending_.at(ts);
        CompletedFrame frame;
        frame.timestamp = ts;
        frame.first_index = fb.fragments.begin()->first;
        frame.last_index = *fb.marker_index;
        std::size_t total = 0;
        for (const auto& [idx, part] : fb.fragments) {
            total += part.size();
        }
        frame.data.reserve(total);
        for (const auto& [idx, part] : fb.fragments) {
            frame.data.insert(frame.data.end(), part.begin(), part.end());
        }
        out.push_back(std::move(frame));
        ++stats_.frames_emitted;
    }

    // Everything at or before the newest completed frame is settled; whatever
    // is still incomplete there is abandoned.
    for (auto it = pending_.begin(); it != pending_.end();) {
        if (!timestamp_newer(it->first, newest)) {
            if (!it->second.complete) {
                ++stats_.frames_dropped;
            }
            it = pending_.erase(it);
        } else {
            ++it;
        }
    }
    horizon_ = newest;
    return out;
}

void Reassembler::flush()
{
    stats_.frames_dropped += pending_.size();
    for (const auto& [ts, fb] : pending_) {
        if (!horizon_ || timestamp_newer(ts, *horizon_)) {
            horizon_ = ts;
        }
    }
    pending_.clear();
}

} // namespace vsrtp
