#ifndef VSRTP_CRYPTO_HPP
#define VSRTP_CRYPTO_HPP

#include "vsrtp/bytes.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string_view>

// Session key derivation, AES-256-CTR payload masking and HMAC-SHA-256 packet
// tags. The block cipher and hash are provided by OpenSSL; everything that
// decides *which* counter block or key is used lives here.

namespace vsrtp {

inline constexpr std::size_t kMasterKeySize = 32;
inline constexpr std::size_t kMasterSaltSize = 16;
inline constexpr std::size_t kSessionKeySize = 32;
inline constexpr std::size_t kAuthTagSize = 32;
inline constexpr std::size_t kBlockSize = 16;

using Key256 = ByteArray<kMasterKeySize>;
using Salt128 = ByteArray<kMasterSaltSize>;
using AuthTag = ByteArray<kAuthTagSize>;

class CryptoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Non-zero 32-bit session identifier. Zero means "no session" and cannot be
/// represented.
class SessionId {
public:
    explicit SessionId(std::uint32_t value);

    std::uint32_t value() const { return value_; }

    friend bool operator==(SessionId, SessionId) = default;

private:
    std::uint32_t value_;
};

/// One AES block, read as a 128-bit big-endian integer.
struct IvBlock {
    ByteArray<kBlockSize> bytes {};

    IvBlock& xor_u64_at(unsigned shift, std::uint64_t value);

    friend bool operator==(const IvBlock&, const IvBlock&) = default;
};

struct MasterSecret {
    Key256 master_key {};
    Salt128 master_salt {};

    MasterSecret() = default;
    MasterSecret(const Key256& key, const Salt128& salt)
        : master_key(key)
        , master_salt(salt)
    {
    }
    /// Throws CryptoError unless the key is 32 bytes and the salt 16 bytes.
    MasterSecret(ByteView key, ByteView salt);
};

struct SessionKeys {
    SessionId session_id { 1 };
    Key256 encryption_key {};
    Key256 salting_key {};
    Key256 authentication_key {};

    SessionKeys() = default;
    SessionKeys(const SessionKeys&) = default;
    SessionKeys& operator=(const SessionKeys&) = default;
    ~SessionKeys();

    friend bool operator==(const SessionKeys&, const SessionKeys&) = default;
};

/// SSRC plus the 48-bit packet index (16-bit sequence number extended with a
/// 32-bit rollover counter).
struct PacketIndex {
    static constexpr std::uint64_t kMask = (std::uint64_t { 1 } << 48) - 1;

    std::uint32_t ssrc = 0;
    std::uint64_t index = 0;

    std::uint16_t sequence_number() const { return static_cast<std::uint16_t>(index); }
    std::uint32_t rollover_counter() const { return static_cast<std::uint32_t>(index >> 16); }
};

enum class IvMode {
    /// Sa_k ^ session_id ^ 2^16 with an SSRC and packet-index term mixed in.
    UniquePerPacket,
    /// Sa_k ^ session_id ^ 2^16 only. Reuses the keystream for every packet of
    /// a session; kept for benchmarks and regression tests.
    SessionConstant,
};

const char* to_string(IvMode mode);
std::optional<IvMode> iv_mode_from_string(std::string_view s);

IvBlock derive_iv_prf(const Salt128& master_salt, SessionId session_id);

SessionKeys derive_session_keys(const MasterSecret& master, SessionId session_id);

IvBlock derive_packet_iv(const Key256& salting_key, SessionId session_id, const PacketIndex& pkt, IvMode mode);

Bytes ctr_keystream(const Key256& key, const IvBlock& iv, std::size_t n_bytes);

/// XORs the data with the Se_k keystream starting at `iv`. Decryption is the
/// same call.
Bytes encrypt_payload(const SessionKeys& keys, const IvBlock& iv, ByteView plaintext);

AuthTag compute_auth_tag(const Key256& auth_key, ByteView authenticated_portion);

/// Constant-time comparison against a freshly computed tag. Never throws on
/// mismatch.
bool verify_auth_tag(const Key256& auth_key, ByteView authenticated_portion, const AuthTag& tag);

/// Cryptographically secure random bytes.
void random_fill(std::span<std::uint8_t> out);

std::uint32_t random_u32();

/// Overwrites a buffer in a way the optimizer cannot elide.
void secure_wipe(std::span<std::uint8_t> buffer);

/// Pre-keyed AES-256-CTR context. Reusing one across packets avoids
/// re-running the key schedule.
class CtrCipher {
public:
    explicit CtrCipher(const Key256& key);
    ~CtrCipher();
    CtrCipher(CtrCipher&&) noexcept;
    CtrCipher& operator=(CtrCipher&&) noexcept;

    /// out.size() must equal in.size(); in and out may alias exactly.
    void apply(const IvBlock& iv, ByteView in, std::span<std::uint8_t> out);

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// Pre-keyed HMAC-SHA-256 context. Not safe for concurrent use.
class HmacSha256 {
public:
    explicit HmacSha256(const Key256& key);
    ~HmacSha256();
    HmacSha256(HmacSha256&&) noexcept;
    HmacSha256& operator=(HmacSha256&&) noexcept;

    AuthTag compute(ByteView first, ByteView second = {});
    bool verify(ByteView first, ByteView second, const AuthTag& tag);

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

} // namespace vsrtp

#endif // VSRTP_CRYPTO_HPP
