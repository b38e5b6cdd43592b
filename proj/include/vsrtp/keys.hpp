#ifndef VSRTP_KEYS_HPP
#define VSRTP_KEYS_HPP

#include "vsrtp/crypto.hpp"

#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <string_view>

// Master key provisioning. The trusted third party that hands out master keys
// is represented only by this interface; how keys reach the provider (key
// exchange, certificates) is outside this library.

namespace vsrtp {

class KeyProvisioningError : public std::runtime_error {
public:
    enum class Code { BadKeyLength, ParseError, KeyNotFound, IoError };

    KeyProvisioningError(Code code, const std::string& what)
        : std::runtime_error(what)
        , code_(code)
    {
    }

    Code code() const { return code_; }

private:
    Code code_;
};

class KeyProvider {
public:
    virtual ~KeyProvider() = default;

    /// Same (peer, uri) always yields the same key for one provider instance.
    virtual Key256 fetch_master_key(std::string_view peer_identity, std::string_view uri) const = 0;
};

/// One pre-shared key for every peer and resource.
class StaticKeyProvider final : public KeyProvider {
public:
    /// Throws KeyProvisioningError(BadKeyLength) unless key is 32 bytes.
    explicit StaticKeyProvider(ByteView key);

    Key256 fetch_master_key(std::string_view peer_identity, std::string_view uri) const override;

private:
    Key256 key_ {};
};

/// Keys looked up by URI from a text file with lines
/// `uri=<uri> key=<64 lowercase hex>`. Blank lines and `#` comments are
/// ignored.
class FileKeyProvider final : public KeyProvider {
public:
    /// Reads and parses the file. Warns (without key material) if the file is
    /// readable by other users.
    explicit FileKeyProvider(const std::filesystem::path& path);

    static FileKeyProvider from_text(std::string_view text);

    Key256 fetch_master_key(std::string_view peer_identity, std::string_view uri) const override;

    std::size_t size() const { return keys_.size(); }

private:
    FileKeyProvider() = default;
    void parse(std::string_view text);

    std::map<std::string, Key256, std::less<>> keys_;
};

std::unique_ptr<KeyProvider> static_provider(ByteView key);
std::unique_ptr<KeyProvider> file_provider(const std::filesystem::path& path);

/// Fresh random master salt. Never returns the same value twice within a
/// process.
Salt128 fresh_master_salt();

} // namespace vsrtp

#endif // VSRTP_KEYS_HPP
