#ifndef VSRTP_BYTES_HPP
#define VSRTP_BYTES_HPP

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace vsrtp {

using Bytes = std::vector<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;

template <std::size_t N>
using ByteArray = std::array<std::uint8_t, N>;

/// Lowercase hex rendering.
std::string to_hex(ByteView data);

/// Parses an even-length hex string (either case). Returns nullopt on any
/// non-hex character or odd length.
std::optional<Bytes> from_hex(std::string_view hex);

inline ByteView as_bytes(std::string_view s)
{
    return { reinterpret_cast<const std::uint8_t*>(s.data()), s.size() };
}

inline void put_be16(std::uint8_t* out, std::uint16_t v)
{
    out[0] = static_cast<std::uint8_t>(v >> 8);
    out[1] = static_cast<std::uint8_t>(v);
}

inline void put_be32(std::uint8_t* out, std::uint32_t v)
{
    out[0] = static_cast<std::uint8_t>(v >> 24);
    out[1] = static_cast<std::uint8_t>(v >> 16);
    out[2] = static_cast<std::uint8_t>(v >> 8);
    out[3] = static_cast<std::uint8_t>(v);
}

inline std::uint16_t get_be16(const std::uint8_t* in)
{
    return static_cast<std::uint16_t>((in[0] << 8) | in[1]);
}

inline std::uint32_t get_be32(const std::uint8_t* in)
{
    return (std::uint32_t { in[0] } << 24) | (std::uint32_t { in[1] } << 16) | (std::uint32_t { in[2] } << 8) |
           std::uint32_t { in[3] };
}

/// 64-bit FNV-1a step applied to each little-endian 64-bit word, then to each
/// remaining tail byte. Inputs shorter than 8 bytes hash as plain FNV-1a.
/// Used as the per-frame digest printed by the sender and receiver so frames
/// can be compared across processes.
std::uint64_t frame_digest(ByteView data);

} // namespace vsrtp

#endif // VSRTP_BYTES_HPP
