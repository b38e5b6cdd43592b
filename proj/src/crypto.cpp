#include "vsrtp/crypto.hpp"

#include <openssl/crypto.h>
#include <openssl/evp.h>
#include <openssl/rand.h>

#include <array>
#include <cstring>

namespace vsrtp {

namespace {

// Bit 16 of the 128-bit IV domain.
constexpr std::uint64_t kIvConstant = 0x10000;

const EVP_MD* sha256_algorithm()
{
    static EVP_MD* md = EVP_MD_fetch(nullptr, "SHA256", nullptr);
    if (md == nullptr) {
        throw CryptoError("SHA-256 is unavailable in this OpenSSL build");
    }
    return md;
}

constexpr std::size_t kShaBlock = 64;

} // namespace

SessionId::SessionId(std::uint32_t value)
    : value_(value)
{
    if (value == 0) {
        throw std::invalid_argument("session id 0 is reserved");
    }
}

IvBlock& IvBlock::xor_u64_at(unsigned shift, std::uint64_t value)
{
    // shift is a multiple of 8; bytes that would land above bit 127 are dropped.
    const unsigned first_byte = shift / 8;
    for (unsigned i = 0; i < 8 && first_byte + i < kBlockSize; ++i) {
        bytes[kBlockSize - 1 - (first_byte + i)] ^= static_cast<std::uint8_t>(value >> (8 * i));
    }
    return *this;
}

MasterSecret::MasterSecret(ByteView key, ByteView salt)
{
    if (key.size() != kMasterKeySize) {
        throw CryptoError("master key must be 32 bytes");
    }
    if (salt.size() != kMasterSaltSize) {
        throw CryptoError("master salt must be 16 bytes");
    }
    std::memcpy(master_key.data(), key.data(), kMasterKeySize);
    std::memcpy(master_salt.data(), salt.data(), kMasterSaltSize);
}

SessionKeys::~SessionKeys()
{
    secure_wipe(encryption_key);
    secure_wipe(salting_key);
    secure_wipe(authentication_key);
}

const char* to_string(IvMode mode)
{
    switch (mode) {
    case IvMode::UniquePerPacket:
        return "unique-per-packet";
    case IvMode::SessionConstant:
        return "session-constant";
    }
    return "?";
}

std::optional<IvMode> iv_mode_from_string(std::string_view s)
{
    for (const IvMode m : { IvMode::UniquePerPacket, IvMode::SessionConstant }) {
        if (s == to_string(m)) {
            return m;
        }
    }
    return std::nullopt;
}

IvBlock derive_iv_prf(const Salt128& master_salt, SessionId session_id)
{
    IvBlock iv { master_salt };
    iv.xor_u64_at(0, session_id.value());
    iv.xor_u64_at(0, kIvConstant);
    return iv;
}

SessionKeys derive_session_keys(const MasterSecret& master, SessionId session_id)
{
    const IvBlock iv = derive_iv_prf(master.master_salt, session_id);

    ByteArray<3 * kSessionKeySize> ks {};
    CtrCipher prf(master.master_key);
    prf.apply(iv, ks, ks);

    SessionKeys keys;
    keys.session_id = session_id;
    std::memcpy(keys.encryption_key.data(), ks.data(), kSessionKeySize);
    std::memcpy(keys.salting_key.data(), ks.data() + kSessionKeySize, kSessionKeySize);
    std::memcpy(keys.authentication_key.data(), ks.data() + 2 * kSessionKeySize, kSessionKeySize);
    secure_wipe(ks);
    return keys;
}

IvBlock derive_packet_iv(const Key256& salting_key, SessionId session_id, const PacketIndex& pkt, IvMode mode)
{
    // Low 128 bits of Sa_k are its last 16 bytes.
    IvBlock iv;
    std::memcpy(iv.bytes.data(), salting_key.data() + (kSessionKeySize - kBlockSize), kBlockSize);
    iv.xor_u64_at(0, session_id.value());
    iv.xor_u64_at(0, kIvConstant);
    if (mode == IvMode::UniquePerPacket) {
        iv.xor_u64_at(64, pkt.ssrc);
        iv.xor_u64_at(16, pkt.index & PacketIndex::kMask);
    }
    return iv;
}

Bytes ctr_keystream(const Key256& key, const IvBlock& iv, std::size_t n_bytes)
{
    Bytes out(n_bytes, 0);
    CtrCipher cipher(key);
    cipher.apply(iv, out, out);
    return out;
}

Bytes encrypt_payload(const SessionKeys& keys, const IvBlock& iv, ByteView plaintext)
{
    Bytes out(plaintext.size());
    CtrCipher cipher(keys.encryption_key);
    cipher.apply(iv, plaintext, out);
    return out;
}

AuthTag compute_auth_tag(const Key256& auth_key, ByteView authenticated_portion)
{
    HmacSha256 mac(auth_key);
    return mac.compute(authenticated_portion);
}

bool verify_auth_tag(const Key256& auth_key, ByteView authenticated_portion, const AuthTag& tag)
{
    HmacSha256 mac(auth_key);
    return mac.verify(authenticated_portion, {}, tag);
}

void random_fill(std::span<std::uint8_t> out)
{
    if (out.empty()) {
        return;
    }
    if (RAND_bytes(out.data(), static_cast<int>(out.size())) != 1) {
        throw CryptoError("RAND_bytes failed");
    }
}

std::uint32_t random_u32()
{
    ByteArray<4> b;
    random_fill(b);
    return get_be32(b.data());
}

void secure_wipe(std::span<std::uint8_t> buffer)
{
    OPENSSL_cleanse(buffer.data(), buffer.size());
}

// CtrCipher

struct CtrCipher::Impl {
    EVP_CIPHER_CTX* ctx = nullptr;

    ~Impl() { EVP_CIPHER_CTX_free(ctx); }
};

CtrCipher::CtrCipher(const Key256& key)
    : impl_(std::make_unique<Impl>())
{
    impl_->ctx = EVP_CIPHER_CTX_new();
    if (impl_->ctx == nullptr ||
        EVP_EncryptInit_ex(impl_->ctx, EVP_aes_256_ctr(), nullptr, key.data(), nullptr) != 1) {
        throw CryptoError("cannot initialize AES-256-CTR");
    }
}

CtrCipher::~CtrCipher() = default;
CtrCipher::CtrCipher(CtrCipher&&) noexcept = default;
CtrCipher& CtrCipher::operator=(CtrCipher&&) noexcept = default;

void CtrCipher::apply(const IvBlock& iv, ByteView in, std::span<std::uint8_t> out)
{
    if (in.size() != out.size()) {
        throw std::invalid_argument("CtrCipher::apply size mismatch");
    }
    if (EVP_EncryptInit_ex(impl_->ctx, nullptr, nullptr, nullptr, iv.bytes.data()) != 1) {
        throw CryptoError("cannot set AES-CTR counter");
    }
    std::size_t done = 0;
    while (done < in.size()) {
        // EVP takes int lengths.
        const std::size_t chunk = std::min<std::size_t>(in.size() - done, std::size_t { 1 } << 30);
        int written = 0;
        if (EVP_EncryptUpdate(impl_->ctx, out.data() + done, &written, in.data() + done, static_cast<int>(chunk)) !=
            1) {
            throw CryptoError("AES-CTR update failed");
        }
        done += chunk;
    }
}

// HmacSha256

// HMAC over the EVP digest. The padded-key blocks are hashed once, so each
// tag costs two context copies instead of an EVP_MAC_CTX duplicate.
struct HmacSha256::Impl {
    EVP_MD_CTX* inner = nullptr;
    EVP_MD_CTX* outer = nullptr;
    EVP_MD_CTX* work = nullptr;

    ~Impl()
    {
        EVP_MD_CTX_free(inner);
        EVP_MD_CTX_free(outer);
        EVP_MD_CTX_free(work);
    }
};

HmacSha256::HmacSha256(const Key256& key)
    : impl_(std::make_unique<Impl>())
{
    static_assert(std::tuple_size_v<Key256> <= kShaBlock);
    impl_->inner = EVP_MD_CTX_new();
    impl_->outer = EVP_MD_CTX_new();
    impl_->work = EVP_MD_CTX_new();
    std::array<std::uint8_t, kShaBlock> ipad {};
    std::array<std::uint8_t, kShaBlock> opad {};
    for (std::size_t i = 0; i < kShaBlock; ++i) {
        const std::uint8_t k = i < key.size() ? key[i] : 0;
        ipad[i] = k ^ 0x36;
        opad[i] = k ^ 0x5c;
    }
    const bool ok = impl_->inner != nullptr && impl_->outer != nullptr && impl_->work != nullptr &&
                    EVP_DigestInit_ex(impl_->inner, sha256_algorithm(), nullptr) == 1 &&
                    EVP_DigestUpdate(impl_->inner, ipad.data(), ipad.size()) == 1 &&
                    EVP_DigestInit_ex(impl_->outer, sha256_algorithm(), nullptr) == 1 &&
                    EVP_DigestUpdate(impl_->outer, opad.data(), opad.size()) == 1;
    OPENSSL_cleanse(ipad.data(), ipad.size());
    OPENSSL_cleanse(opad.data(), opad.size());
    if (!ok) {
        throw CryptoError("cannot initialize HMAC-SHA-256");
    }
}

HmacSha256::~HmacSha256() = default;
HmacSha256::HmacSha256(HmacSha256&&) noexcept = default;
HmacSha256& HmacSha256::operator=(HmacSha256&&) noexcept = default;

AuthTag HmacSha256::compute(ByteView first, ByteView second)
{
    AuthTag inner_hash {};
    AuthTag tag {};
    unsigned int len = 0;
    EVP_MD_CTX* w = impl_->work;
    const bool inner_ok = EVP_MD_CTX_copy_ex(w, impl_->inner) == 1 &&
                          EVP_DigestUpdate(w, first.data(), first.size()) == 1 &&
                          EVP_DigestUpdate(w, second.data(), second.size()) == 1 &&
                          EVP_DigestFinal_ex(w, inner_hash.data(), &len) == 1 && len == inner_hash.size();
    if (!inner_ok || EVP_MD_CTX_copy_ex(w, impl_->outer) != 1 ||
        EVP_DigestUpdate(w, inner_hash.data(), inner_hash.size()) != 1 || EVP_DigestFinal_ex(w, tag.data(), &len) != 1 ||
        len != tag.size()) {
        throw CryptoError("HMAC computation failed");
    }
    return tag;
}

bool HmacSha256::verify(ByteView first, ByteView second, const AuthTag& tag)
{
    const AuthTag expected = compute(first, second);
    return CRYPTO_memcmp(expected.data(), tag.data(), tag.size()) == 0;
}

} // namespace vsrtp
