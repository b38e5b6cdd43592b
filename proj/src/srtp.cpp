#include "vsrtp/srtp.hpp"

#include <cstring>
#include <stdexcept>

namespace vsrtp {

namespace {

using Clock = std::chrono::steady_clock;

} // namespace

ReplayWindow::Verdict ReplayWindow::check(std::uint64_t index) const
{
    if (!highest_ || index > *highest_) {
        return Verdict::Fresh;
    }
    const std::uint64_t delta = *highest_ - index;
    if (delta >= kSize) {
        return Verdict::Stale;
    }
    return (seen_ >> delta) & 1 ? Verdict::Duplicate : Verdict::Fresh;
}

void ReplayWindow::commit(std::uint64_t index)
{
    if (!highest_) {
        highest_ = index;
        seen_ = 1;
        return;
    }
    if (index > *highest_) {
        const std::uint64_t shift = index - *highest_;
        seen_ = shift >= kSize ? 0 : seen_ << shift;
        seen_ |= 1;
        highest_ = index;
        return;
    }
    const std::uint64_t delta = *highest_ - index;
    if (delta < kSize) {
        seen_ |= std::uint64_t { 1 } << delta;
    }
}

std::optional<std::uint64_t> estimate_packet_index(std::optional<std::uint64_t> highest, std::uint16_t sequence_number)
{
    if (!highest) {
        return sequence_number;
    }
    const std::uint32_t s_l = static_cast<std::uint16_t>(*highest);
    const std::int64_t roc = static_cast<std::int64_t>(*highest >> 16);
    const std::uint32_t seq = sequence_number;
    std::int64_t v = roc;
    if (s_l < 32768) {
        if (seq > s_l && seq - s_l > 32768) {
            v = roc - 1;
        }
    } else if (s_l - 32768 > seq) {
        v = roc + 1;
    }
    if (v < 0) {
        return std::nullopt;
    }
    return ((static_cast<std::uint64_t>(v) << 16) | seq) & PacketIndex::kMask;
}

// Protector

Protector::Protector(const SessionKeys& keys, IvMode mode, bool secured)
    : keys_(keys)
    , mode_(mode)
    , secured_(secured)
    , cipher_(keys.encryption_key)
    , mac_(keys.authentication_key)
{
}

void Protector::protect_into(const RtpHeader& header, const PacketIndex& pkt, ByteView payload, Bytes& wire,
                             ProtectTiming* timing)
{
    if (header.sequence_number != pkt.sequence_number() || header.ssrc != pkt.ssrc) {
        throw std::invalid_argument("header does not match packet index");
    }
    wire.resize(kPacketOverhead + payload.size());
    const auto h = serialize_header(header);
    std::memcpy(wire.data(), h.data(), h.size());
    const std::span<std::uint8_t> body(wire.data() + kRtpHeaderSize, payload.size());

    const auto t0 = Clock::now();
    if (secured_) {
        cipher_.apply(derive_packet_iv(keys_.salting_key, keys_.session_id, pkt, mode_), payload, body);
    } else if (!payload.empty()) {
        std::memcpy(body.data(), payload.data(), payload.size());
    }
    const auto t1 = Clock::now();
    AuthTag tag {};
    if (secured_) {
        tag = mac_.compute(ByteView { wire.data(), kRtpHeaderSize + payload.size() });
    }
    std::memcpy(wire.data() + kRtpHeaderSize + payload.size(), tag.data(), tag.size());
    const auto t2 = Clock::now();

    if (timing != nullptr) {
        timing->encrypt += t1 - t0;
        timing->tag += t2 - t1;
    }
}

Bytes Protector::protect(const RtpHeader& header, const PacketIndex& pkt, ByteView payload)
{
    Bytes wire;
    protect_into(header, pkt, payload, wire);
    return wire;
}

// Unprotector

Unprotector::Unprotector(const SessionKeys& keys, IvMode mode, bool secured, const ReplayWindow& window)
    : keys_(keys)
    , mode_(mode)
    , secured_(secured)
    , window_(window)
    , cipher_(keys.encryption_key)
    , mac_(keys.authentication_key)
{
}

UnprotectResult Unprotector::unprotect(ByteView wire)
{
    UnprotectResult result;
    const HeaderParse parsed = parse_header(wire);
    result.header = parsed.header;
    if (parsed.status != PacketStatus::Ok) {
        result.status = parsed.status;
        return result;
    }
    if (wire.size() < kPacketOverhead) {
        result.status = PacketStatus::TooShort;
        return result;
    }

    const auto index = estimate_packet_index(window_.highest(), parsed.header.sequence_number);
    if (!index || window_.check(*index) != ReplayWindow::Verdict::Fresh) {
        result.status = PacketStatus::ReplayDrop;
        return result;
    }
    result.index = *index;

    const std::size_t body_len = wire.size() - kPacketOverhead;
    const ByteView authenticated = wire.first(kRtpHeaderSize + body_len);
    if (secured_) {
        AuthTag tag;
        std::memcpy(tag.data(), wire.data() + kRtpHeaderSize + body_len, tag.size());
        if (!mac_.verify(authenticated, {}, tag)) {
            result.status = PacketStatus::AuthFailure;
            return result;
        }
    }

    const ByteView body = wire.subspan(kRtpHeaderSize, body_len);
    result.payload.resize(body_len);
    if (secured_) {
        const PacketIndex pkt { parsed.header.ssrc, *index };
        cipher_.apply(derive_packet_iv(keys_.salting_key, keys_.session_id, pkt, mode_), body, result.payload);
    } else if (body_len != 0) {
        std::memcpy(result.payload.data(), body.data(), body_len);
    }
    window_.commit(*index);
    return result;
}

Bytes protect(const SessionKeys& keys, const PacketIndex& pkt, const RtpHeader& header, ByteView payload,
              IvMode mode)
{
    Protector p(keys, mode);
    return p.protect(header, pkt, payload);
}

UnprotectResult unprotect(const SessionKeys& keys, ByteView wire, ReplayWindow& window, IvMode mode)
{
    Unprotector u(keys, mode, true, window);
    UnprotectResult result = u.unprotect(wire);
    window = u.window();
    return result;
}

// PacketSender

PacketSender::PacketSender(const SessionKeys& keys, IvMode mode, std::uint32_t ssrc, bool secured,
                           std::uint64_t first_index, std::uint8_t payload_type)
    : protector_(keys, mode, secured)
    , ssrc_(ssrc)
    , next_index_(first_index & PacketIndex::kMask)
    , payload_type_(payload_type)
{
}

std::vector<Bytes> PacketSender::packetize(ByteView frame, std::uint32_t timestamp, std::size_t mtu_payload,
                                           ProtectTiming* timing)
{
    std::vector<Bytes> out;
    packetize_each(
        frame, timestamp, mtu_payload, [&](ByteView wire) { out.emplace_back(wire.begin(), wire.end()); }, timing);
    return out;
}

std::size_t PacketSender::packetize_each(ByteView frame, std::uint32_t timestamp, std::size_t mtu_payload,
                                         const std::function<void(ByteView)>& emit, ProtectTiming* timing)
{
    const auto fragments = fragment_frame(frame, mtu_payload);
    Bytes wire;
    wire.reserve(kPacketOverhead + mtu_payload);
    for (const Fragment& fragment : fragments) {
        const PacketIndex pkt { ssrc_, next_index_ };
        RtpHeader h;
        h.marker = fragment.marker;
        h.payload_type = payload_type_;
        h.sequence_number = pkt.sequence_number();
        h.timestamp = timestamp;
        h.ssrc = ssrc_;
        protector_.protect_into(h, pkt, fragment.payload, wire, timing);
        next_index_ = (next_index_ + 1) & PacketIndex::kMask;
        emit(wire);
    }
    return fragments.size();
}

} // namespace vsrtp
