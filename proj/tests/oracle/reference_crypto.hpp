#ifndef VSRTP_TESTS_REFERENCE_CRYPTO_HPP
#define VSRTP_TESTS_REFERENCE_CRYPTO_HPP

// Test-only reference implementations. Written straight from FIPS-197,
// FIPS 180-4 and RFC 2104 with no shared code or OpenSSL calls, so they can
// serve as an independent check on the production crypto path.

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace oracle {

using Bytes = std::vector<std::uint8_t>;
using Block = std::array<std::uint8_t, 16>;
using u128 = unsigned __int128;

Block aes256_encrypt_block(const std::array<std::uint8_t, 32>& key, const Block& in);

/// Counter blocks are incremented as 128-bit big-endian integers.
Bytes aes256_ctr(const std::array<std::uint8_t, 32>& key, const Block& first_counter, const Bytes& data);

std::array<std::uint8_t, 32> sha256(const Bytes& data);

std::array<std::uint8_t, 32> hmac_sha256(const Bytes& key, const Bytes& message);

u128 load_be128(const Block& b);
Block store_be128(u128 v);

Bytes hex(const std::string& s);
std::string to_hex(const std::uint8_t* data, std::size_t n);

template <typename C>
std::string to_hex(const C& c)
{
    return to_hex(c.data(), c.size());
}

} // namespace oracle

#endif
