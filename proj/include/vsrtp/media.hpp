#ifndef VSRTP_MEDIA_HPP
#define VSRTP_MEDIA_HPP

#include "vsrtp/bytes.hpp"

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace vsrtp {

class MediaError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class CorruptPayload : public MediaError {
public:
    using MediaError::MediaError;
};

class ManifestError : public MediaError {
public:
    using MediaError::MediaError;
};

struct Resolution {
    std::uint32_t width = 0;
    std::uint32_t height = 0;

    std::size_t frame_bytes() const { return std::size_t { width } * height * 3; }
    /// "480p" for the named geometries, else "WxH".
    std::string name() const;

    friend bool operator==(const Resolution&, const Resolution&) = default;
};

inline constexpr Resolution k480p { 854, 480 };
inline constexpr Resolution k720p { 1280, 720 };
inline constexpr Resolution k1080p { 1920, 1080 };

/// Accepts "480p", "720p", "1080p" or "<W>x<H>".
std::optional<Resolution> parse_resolution(std::string_view s);

enum class PixelFormat { Rgb24 };

struct Frame {
    std::uint32_t width = 0;
    std::uint32_t height = 0;
    PixelFormat format = PixelFormat::Rgb24;
    Bytes data;
    /// 90 kHz units.
    std::uint32_t capture_ts = 0;

    Resolution resolution() const { return { width, height }; }
    bool valid() const { return data.size() == std::size_t { width } * height * 3; }
};

enum class Codec { Raw, Jpeg };

const char* to_string(Codec c);
std::optional<Codec> codec_from_string(std::string_view s);

struct EncodedFrame {
    Codec codec = Codec::Raw;
    bool base64_wrapped = false;
    Bytes payload;
    std::uint32_t width = 0;
    std::uint32_t height = 0;
};

inline constexpr int kDefaultJpegQuality = 90;

/// Codec first, then optional base64. Throws std::invalid_argument for an
/// invalid frame or quality outside 1..100.
EncodedFrame encode_frame(const Frame& f, Codec codec, int quality = kDefaultJpegQuality, bool base64 = true);

/// Throws CorruptPayload on malformed base64, JPEG data, or dimensions that
/// differ from the declared ones.
Frame decode_frame(const EncodedFrame& e);

/// Standard alphabet with padding.
Bytes base64_encode(ByteView data);
/// nullopt unless the input is canonical padded base64.
std::optional<Bytes> base64_decode(ByteView text);

class FrameSource {
public:
    virtual ~FrameSource() = default;

    /// nullopt at end of stream.
    virtual std::optional<Frame> next() = 0;
    virtual Resolution resolution() const = 0;
    virtual double fps_target() const = 0;
};

enum class Motion { StaticTraffic, Handheld };

const char* to_string(Motion m);
std::optional<Motion> motion_from_string(std::string_view s);

/// Deterministic per seed. frame_count 0 means unbounded.
class SyntheticSource final : public FrameSource {
public:
    SyntheticSource(Resolution res, std::uint64_t seed, Motion motion, std::size_t frame_count = 0,
                    double fps = 30.0);

    std::optional<Frame> next() override;
    Resolution resolution() const override { return res_; }
    double fps_target() const override { return fps_; }

private:
    void render_static(Bytes& out);
    void render_handheld(Bytes& out);

    Resolution res_;
    std::uint64_t seed_;
    Motion motion_;
    std::size_t frame_count_;
    double fps_;
    std::size_t produced_ = 0;
    std::uint64_t rng_;
    Bytes background_;
    std::uint32_t scene_w_ = 0;
    std::uint32_t scene_h_ = 0;
    double cam_x_ = 0;
    double cam_y_ = 0;
};

/// Frames listed in a manifest file: a header line
/// `resolution=<W>x<H> format=RGB24`, then one raw frame file per line,
/// relative to the manifest's directory. All entries are checked when the
/// source is opened.
class ManifestSource final : public FrameSource {
public:
    explicit ManifestSource(const std::filesystem::path& manifest, double fps = 30.0);

    std::optional<Frame> next() override;
    Resolution resolution() const override { return res_; }
    double fps_target() const override { return fps_; }

    std::size_t size() const { return entries_.size(); }

private:
    Resolution res_;
    double fps_;
    std::vector<std::filesystem::path> entries_;
    std::size_t position_ = 0;
};

/// Writes frames as raw files plus a manifest. Returns the manifest path.
std::filesystem::path write_manifest(const std::filesystem::path& directory, const std::vector<Frame>& frames);

/// Capture timestamp in 90 kHz units for frame number i at the given rate.
std::uint32_t capture_timestamp(std::size_t i, double fps);

} // namespace vsrtp

#endif // VSRTP_MEDIA_HPP
