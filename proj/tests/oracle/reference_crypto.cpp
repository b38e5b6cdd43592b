#include "reference_crypto.hpp"

#include <stdexcept>

namespace oracle {

namespace {

// GF(2^8) with the AES polynomial x^8 + x^4 + x^3 + x + 1.
std::uint8_t gf_mul(std::uint8_t a, std::uint8_t b)
{
    std::uint8_t r = 0;
    while (b) {
        if (b & 1) {
            r ^= a;
        }
        const bool hi = a & 0x80;
        a = static_cast<std::uint8_t>(a << 1);
        if (hi) {
            a ^= 0x1b;
        }
        b >>= 1;
    }
    return r;
}

std::uint8_t gf_inv(std::uint8_t a)
{
    if (a == 0) {
        return 0;
    }
    // a^254
    std::uint8_t r = 1;
    for (int i = 0; i < 254; ++i) {
        r = gf_mul(r, a);
    }
    return r;
}

std::uint8_t rotl8(std::uint8_t x, int s)
{
    return static_cast<std::uint8_t>((x << s) | (x >> (8 - s)));
}

struct SBox {
    std::array<std::uint8_t, 256> fwd {};

    SBox()
    {
        for (int i = 0; i < 256; ++i) {
            const std::uint8_t b = gf_inv(static_cast<std::uint8_t>(i));
            fwd[i] = static_cast<std::uint8_t>(b ^ rotl8(b, 1) ^ rotl8(b, 2) ^ rotl8(b, 3) ^ rotl8(b, 4) ^ 0x63);
        }
    }
};

const SBox& sbox()
{
    static const SBox s;
    return s;
}

// State is column-major: state[r + 4c] = in[r + 4c].
using State = std::array<std::uint8_t, 16>;

void sub_bytes(State& s)
{
    for (auto& b : s) {
        b = sbox().fwd[b];
    }
}

void shift_rows(State& s)
{
    State t = s;
    for (int r = 0; r < 4; ++r) {
        for (int c = 0; c < 4; ++c) {
            s[r + 4 * c] = t[r + 4 * ((c + r) % 4)];
        }
    }
}

void mix_columns(State& s)
{
    for (int c = 0; c < 4; ++c) {
        const std::uint8_t a0 = s[4 * c], a1 = s[4 * c + 1], a2 = s[4 * c + 2], a3 = s[4 * c + 3];
        s[4 * c] = gf_mul(a0, 2) ^ gf_mul(a1, 3) ^ a2 ^ a3;
        s[4 * c + 1] = a0 ^ gf_mul(a1, 2) ^ gf_mul(a2, 3) ^ a3;
        s[4 * c + 2] = a0 ^ a1 ^ gf_mul(a2, 2) ^ gf_mul(a3, 3);
        s[4 * c + 3] = gf_mul(a0, 3) ^ a1 ^ a2 ^ gf_mul(a3, 2);
    }
}

// 15 round keys of 16 bytes for Nk = 8, Nr = 14.
std::array<std::uint8_t, 240> expand_key(const std::array<std::uint8_t, 32>& key)
{
    std::array<std::uint8_t, 240> w {};
    for (int i = 0; i < 32; ++i) {
        w[i] = key[i];
    }
    std::uint8_t rcon = 1;
    for (int i = 8; i < 60; ++i) {
        std::array<std::uint8_t, 4> temp { w[4 * (i - 1)], w[4 * (i - 1) + 1], w[4 * (i - 1) + 2],
                                           w[4 * (i - 1) + 3] };
        if (i % 8 == 0) {
            temp = { temp[1], temp[2], temp[3], temp[0] };
            for (auto& t : temp) {
                t = sbox().fwd[t];
            }
            temp[0] ^= rcon;
            rcon = gf_mul(rcon, 2);
        } else if (i % 8 == 4) {
            for (auto& t : temp) {
                t = sbox().fwd[t];
            }
        }
        for (int j = 0; j < 4; ++j) {
            w[4 * i + j] = w[4 * (i - 8) + j] ^ temp[j];
        }
    }
    return w;
}

void add_round_key(State& s, const std::array<std::uint8_t, 240>& w, int round)
{
    for (int i = 0; i < 16; ++i) {
        s[i] ^= w[16 * round + i];
    }
}

std::uint32_t rotr(std::uint32_t x, int n)
{
    return (x >> n) | (x << (32 - n));
}

int nibble(char c)
{
    if (c >= '0' && c <= '9') {
        return c - '0';
    }
    if (c >= 'a' && c <= 'f') {
        return c - 'a' + 10;
    }
    if (c >= 'A' && c <= 'F') {
        return c - 'A' + 10;
    }
    throw std::invalid_argument("bad hex");
}

} // namespace

Block aes256_encrypt_block(const std::array<std::uint8_t, 32>& key, const Block& in)
{
    const auto w = expand_key(key);
    State s = in;
    add_round_key(s, w, 0);
    for (int round = 1; round < 14; ++round) {
        sub_bytes(s);
        shift_rows(s);
        mix_columns(s);
        add_round_key(s, w, round);
    }
    sub_bytes(s);
    shift_rows(s);
    add_round_key(s, w, 14);
    return s;
}

Bytes aes256_ctr(const std::array<std::uint8_t, 32>& key, const Block& first_counter, const Bytes& data)
{
    Bytes out(data.size());
    u128 counter = load_be128(first_counter);
    for (std::size_t off = 0; off < data.size(); off += 16) {
        const Block ks = aes256_encrypt_block(key, store_be128(counter));
        for (std::size_t i = 0; i < 16 && off + i < data.size(); ++i) {
            out[off + i] = data[off + i] ^ ks[i];
        }
        ++counter;
    }
    return out;
}

std::array<std::uint8_t, 32> sha256(const Bytes& data)
{
    static constexpr std::uint32_t k[64] = {
        0x428a2f98, 0x71374491, 0xb5c0fbcf, 0xe9b5dba5, 0x3956c25b, 0x59f111f1, 0x923f82a4, 0xab1c5ed5,
        0xd807aa98, 0x12835b01, 0x243185be, 0x550c7dc3, 0x72be5d74, 0x80deb1fe, 0x9bdc06a7, 0xc19bf174,
        0xe49b69c1, 0xefbe4786, 0x0fc19dc6, 0x240ca1cc, 0x2de92c6f, 0x4a7484aa, 0x5cb0a9dc, 0x76f988da,
        0x983e5152, 0xa831c66d, 0xb00327c8, 0xbf597fc7, 0xc6e00bf3, 0xd5a79147, 0x06ca6351, 0x14292967,
        0x27b70a85, 0x2e1b2138, 0x4d2c6dfc, 0x53380d13, 0x650a7354, 0x766a0abb, 0x81c2c92e, 0x92722c85,
        0xa2bfe8a1, 0xa81a664b, 0xc24b8b70, 0xc76c51a3, 0xd192e819, 0xd6990624, 0xf40e3585, 0x106aa070,
        0x19a4c116, 0x1e376c08, 0x2748774c, 0x34b0bcb5, 0x391c0cb3, 0x4ed8aa4a, 0x5b9cca4f, 0x682e6ff3,
        0x748f82ee, 0x78a5636f, 0x84c87814, 0x8cc70208, 0x90befffa, 0xa4506ceb, 0xbef9a3f7, 0xc67178f2,
    };
    std::uint32_t h[8] = { 0x6a09e667, 0xbb67ae85, 0x3c6ef372, 0xa54ff53a,
                           0x510e527f, 0x9b05688c, 0x1f83d9ab, 0x5be0cd19 };

    Bytes msg = data;
    const std::uint64_t bit_len = static_cast<std::uint64_t>(data.size()) * 8;
    msg.push_back(0x80);
    while (msg.size() % 64 != 56) {
        msg.push_back(0);
    }
    for (int i = 7; i >= 0; --i) {
        msg.push_back(static_cast<std::uint8_t>(bit_len >> (8 * i)));
    }

    for (std::size_t chunk = 0; chunk < msg.size(); chunk += 64) {
        std::uint32_t w[64];
        for (int i = 0; i < 16; ++i) {
            w[i] = (std::uint32_t { msg[chunk + 4 * i] } << 24) | (std::uint32_t { msg[chunk + 4 * i + 1] } << 16) |
                   (std::uint32_t { msg[chunk + 4 * i + 2] } << 8) | std::uint32_t { msg[chunk + 4 * i + 3] };
        }
        for (int i = 16; i < 64; ++i) {
            const std::uint32_t s0 = rotr(w[i - 15], 7) ^ rotr(w[i - 15], 18) ^ (w[i - 15] >> 3);
            const std::uint32_t s1 = rotr(w[i - 2], 17) ^ rotr(w[i - 2], 19) ^ (w[i - 2] >> 10);
            w[i] = w[i - 16] + s0 + w[i - 7] + s1;
        }
        std::uint32_t a = h[0], b = h[1], c = h[2], d = h[3], e = h[4], f = h[5], g = h[6], hh = h[7];
        for (int i = 0; i < 64; ++i) {
            const std::uint32_t S1 = rotr(e, 6) ^ rotr(e, 11) ^ rotr(e, 25);
            const std::uint32_t ch = (e & f) ^ (~e & g);
            const std::uint32_t t1 = hh + S1 + ch + k[i] + w[i];
            const std::uint32_t S0 = rotr(a, 2) ^ rotr(a, 13) ^ rotr(a, 22);
            const std::uint32_t maj = (a & b) ^ (a & c) ^ (b & c);
            const std::uint32_t t2 = S0 + maj;
            hh = g;
            g = f;
            f = e;
            e = d + t1;
            d = c;
            c = b;
            b = a;
            a = t1 + t2;
        }
        h[0] += a;
        h[1] += b;
        h[2] += c;
        h[3] += d;
        h[4] += e;
        h[5] += f;
        h[6] += g;
        h[7] += hh;
    }

    std::array<std::uint8_t, 32> out {};
    for (int i = 0; i < 8; ++i) {
        out[4 * i] = static_cast<std::uint8_t>(h[i] >> 24);
        out[4 * i + 1] = static_cast<std::uint8_t>(h[i] >> 16);
        out[4 * i + 2] = static_cast<std::uint8_t>(h[i] >> 8);
        out[4 * i + 3] = static_cast<std::uint8_t>(h[i]);
    }
    return out;
}

std::array<std::uint8_t, 32> hmac_sha256(const Bytes& key, const Bytes& message)
{
    Bytes k = key;
    if (k.size() > 64) {
        const auto d = sha256(k);
        k.assign(d.begin(), d.end());
    }
    k.resize(64, 0);

    Bytes inner(64), outer(64);
    for (int i = 0; i < 64; ++i) {
        inner[i] = k[i] ^ 0x36;
        outer[i] = k[i] ^ 0x5c;
    }
    inner.insert(inner.end(), message.begin(), message.end());
    const auto inner_hash = sha256(inner);
    outer.insert(outer.end(), inner_hash.begin(), inner_hash.end());
    return sha256(outer);
}

u128 load_be128(const Block& b)
{
    u128 v = 0;
    for (const auto byte : b) {
        v = (v << 8) | byte;
    }
    return v;
}

Block store_be128(u128 v)
{
    Block b {};
    for (int i = 15; i >= 0; --i) {
        b[i] = static_cast<std::uint8_t>(v);
        v >>= 8;
    }
    return b;
}

Bytes hex(const std::string& s)
{
    Bytes out;
    for (std::size_t i = 0; i + 1 < s.size(); i += 2) {
        out.push_back(static_cast<std::uint8_t>((nibble(s[i]) << 4) | nibble(s[i + 1])));
    }
    return out;
}

std::string to_hex(const std::uint8_t* data, std::size_t n)
{
    static const char* digits = "0123456789abcdef";
    std::string out;
    for (std::size_t i = 0; i < n; ++i) {
        out.push_back(digits[data[i] >> 4]);
        out.push_back(digits[data[i] & 15]);
    }
    return out;
}

} // namespace oracle
