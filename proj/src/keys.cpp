#include "vsrtp/keys.hpp"

#include <spdlog/spdlog.h>

#include <fstream>
#include <mutex>
#include <set>
#include <sstream>

namespace vsrtp {

namespace {

bool is_lower_hex(std::string_view s)
{
    for (const char c : s) {
        if (!((c >= '0' && c <= '9') || (c >= 'a' && c <= 'f'))) {
            return false;
        }
    }
    return true;
}

} // namespace

StaticKeyProvider::StaticKeyProvider(ByteView key)
{
    if (key.size() != kMasterKeySize) {
        throw KeyProvisioningError(KeyProvisioningError::Code::BadKeyLength,
                                   "master key must be 32 bytes, got " + std::to_string(key.size()));
    }
    std::copy(key.begin(), key.end(), key_.begin());
}

Key256 StaticKeyProvider::fetch_master_key(std::string_view, std::string_view) const
{
    return key_;
}

FileKeyProvider::FileKeyProvider(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw KeyProvisioningError(KeyProvisioningError::Code::IoError, "cannot open key file " + path.string());
    }
    std::error_code ec;
    const auto perms = std::filesystem::status(path, ec).permissions();
    if (!ec && (perms & std::filesystem::perms::others_read) != std::filesystem::perms::none) {
        spdlog::warn("key file {} is readable by other users", path.string());
    }
    std::ostringstream text;
    text << in.rdbuf();
    parse(text.str());
}

FileKeyProvider FileKeyProvider::from_text(std::string_view text)
{
    FileKeyProvider p;
    p.parse(text);
    return p;
}

void FileKeyProvider::parse(std::string_view text)
{
    std::size_t line_no = 0;
    while (!text.empty()) {
        const std::size_t nl = text.find('\n');
        std::string_view line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view {} : text.substr(nl + 1);
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.remove_suffix(1);
        }
        const auto first = line.find_first_not_of(" \t");
        if (first == std::string_view::npos || line[first] == '#') {
            continue;
        }
        line.remove_prefix(first);

        const auto fail = [&](const std::string& why) {
            // Line content is not echoed: it may hold key material.
            throw KeyProvisioningError(KeyProvisioningError::Code::ParseError,
                                       "key file line " + std::to_string(line_no) + ": " + why);
        };
        const std::size_t sep = line.find(' ');
        if (sep == std::string_view::npos) {
            fail("expected 'uri=<uri> key=<hex>'");
        }
        const std::string_view uri_part = line.substr(0, sep);
        std::string_view key_part = line.substr(sep + 1);
        while (!key_part.empty() && (key_part.back() == ' ' || key_part.back() == '\t')) {
            key_part.remove_suffix(1);
        }
        if (uri_part.substr(0, 4) != "uri=" || uri_part.size() == 4) {
            fail("missing uri=");
        }
        if (key_part.substr(0, 4) != "key=") {
            fail("missing key=");
        }
        const std::string_view hex = key_part.substr(4);
        if (hex.size() != 2 * kMasterKeySize || !is_lower_hex(hex)) {
            fail("key must be 64 lowercase hex characters");
        }
        const auto bytes = from_hex(hex);
        Key256 key {};
        std::copy(bytes->begin(), bytes->end(), key.begin());
        if (!keys_.emplace(std::string(uri_part.substr(4)), key).second) {
            fail("duplicate uri");
        }
    }
}

Key256 FileKeyProvider::fetch_master_key(std::string_view, std::string_view uri) const
{
    const auto it = keys_.find(uri);
    if (it == keys_.end()) {
        throw KeyProvisioningError(KeyProvisioningError::Code::KeyNotFound,
                                   "no key for uri '" + std::string(uri) + "'");
    }
    return it->second;
}

std::unique_ptr<KeyProvider> static_provider(ByteView key)
{
    return std::make_unique<StaticKeyProvider>(key);
}

std::unique_ptr<KeyProvider> file_provider(const std::filesystem::path& path)
{
    return std::make_unique<FileKeyProvider>(path);
}

Salt128 fresh_master_salt()
{
    static std::mutex mutex;
    static std::set<Salt128> issued;

    std::lock_guard lock(mutex);
    for (;;) {
        Salt128 salt;
        random_fill(salt);
        if (issued.insert(salt).second) {
            return salt;
        }
    }
}

} // namespace vsrtp
