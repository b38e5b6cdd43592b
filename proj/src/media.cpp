#include "vsrtp/media.hpp"

#include <openssl/evp.h>

#include <jpeglib.h>

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <fstream>

namespace vsrtp {

namespace {

std::uint64_t splitmix64(std::uint64_t& state)
{
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

double uniform01(std::uint64_t& state)
{
    return static_cast<double>(splitmix64(state) >> 11) * 0x1.0p-53;
}

std::uint8_t clamp_u8(int v)
{
    return static_cast<std::uint8_t>(std::clamp(v, 0, 255));
}

// Smooth gradient with randomly coloured rectangles, plus fixed fine texture
// of the given amplitude.
Bytes render_scene(std::uint32_t w, std::uint32_t h, std::uint64_t& rng, int rects, int texture)
{
    Bytes img(std::size_t { w } * h * 3);
    const int base[3] = { static_cast<int>(splitmix64(rng) % 96), static_cast<int>(splitmix64(rng) % 96),
                          static_cast<int>(splitmix64(rng) % 96) };
    for (std::uint32_t y = 0; y < h; ++y) {
        for (std::uint32_t x = 0; x < w; ++x) {
            std::uint8_t* p = &img[(std::size_t { y } * w + x) * 3];
            p[0] = clamp_u8(base[0] + static_cast<int>(120 * x / std::max(w, 1u)));
            p[1] = clamp_u8(base[1] + static_cast<int>(120 * y / std::max(h, 1u)));
            p[2] = clamp_u8(base[2] + static_cast<int>(60 * (x + y) / std::max(w + h, 1u)));
        }
    }
    for (int r = 0; r < rects; ++r) {
        const std::uint32_t rw = 1 + static_cast<std::uint32_t>(splitmix64(rng) % std::max(w / 6, 1u));
        const std::uint32_t rh = 1 + static_cast<std::uint32_t>(splitmix64(rng) % std::max(h / 6, 1u));
        const std::uint32_t x0 = static_cast<std::uint32_t>(splitmix64(rng) % w);
        const std::uint32_t y0 = static_cast<std::uint32_t>(splitmix64(rng) % h);
        const std::uint64_t c = splitmix64(rng);
        for (std::uint32_t y = y0; y < std::min(h, y0 + rh); ++y) {
            for (std::uint32_t x = x0; x < std::min(w, x0 + rw); ++x) {
                std::uint8_t* p = &img[(std::size_t { y } * w + x) * 3];
                p[0] = static_cast<std::uint8_t>(c);
                p[1] = static_cast<std::uint8_t>(c >> 8);
                p[2] = static_cast<std::uint8_t>(c >> 16);
            }
        }
    }
    if (texture > 0) {
        const std::uint64_t span = 2 * static_cast<std::uint64_t>(texture) + 1;
        for (auto& b : img) {
            b = clamp_u8(b + static_cast<int>(splitmix64(rng) % span) - texture);
        }
    }
    return img;
}

struct JpegError {
    jpeg_error_mgr mgr;
    std::jmp_buf jump;
    char message[JMSG_LENGTH_MAX];
};

void on_jpeg_error(j_common_ptr cinfo)
{
    auto* err = reinterpret_cast<JpegError*>(cinfo->err);
    (*cinfo->err->format_message)(cinfo, err->message);
    std::longjmp(err->jump, 1);
}

void on_jpeg_message(j_common_ptr cinfo, int level)
{
    if (level < 0) {
        ++cinfo->err->num_warnings;
    }
}

Bytes jpeg_encode(const Frame& f, int quality)
{
    jpeg_compress_struct cinfo {};
    JpegError err {};
    cinfo.err = jpeg_std_error(&err.mgr);
    err.mgr.error_exit = on_jpeg_error;
    err.mgr.emit_message = on_jpeg_message;
    unsigned char* out = nullptr;
    unsigned long out_size = 0;

    if (setjmp(err.jump)) {
        jpeg_destroy_compress(&cinfo);
        std::free(out);
        throw MediaError(std::string("JPEG encode failed: ") + err.message);
    }
    jpeg_create_compress(&cinfo);
    jpeg_mem_dest(&cinfo, &out, &out_size);
    cinfo.image_width = f.width;
    cinfo.image_height = f.height;
    cinfo.input_components = 3;
    cinfo.in_color_space = JCS_RGB;
    jpeg_set_defaults(&cinfo);
    jpeg_set_quality(&cinfo, quality, TRUE);
    jpeg_start_compress(&cinfo, TRUE);
    const std::size_t stride = std::size_t { f.width } * 3;
    while (cinfo.next_scanline < cinfo.image_height) {
        JSAMPROW row = const_cast<JSAMPROW>(f.data.data() + cinfo.next_scanline * stride);
        jpeg_write_scanlines(&cinfo, &row, 1);
    }
    jpeg_finish_compress(&cinfo);
    Bytes result(out, out + out_size);
    jpeg_destroy_compress(&cinfo);
    std::free(out);
    return result;
}

Frame jpeg_decode(ByteView data, std::uint32_t width, std::uint32_t height)
{
    jpeg_decompress_struct cinfo {};
    JpegError err {};
    cinfo.err = jpeg_std_error(&err.mgr);
    err.mgr.error_exit = on_jpeg_error;
    err.mgr.emit_message = on_jpeg_message;
    Frame frame;

    if (setjmp(err.jump)) {
        jpeg_destroy_decompress(&cinfo);
        throw CorruptPayload(std::string("JPEG decode failed: ") + err.message);
    }
    jpeg_create_decompress(&cinfo);
    jpeg_mem_src(&cinfo, data.data(), static_cast<unsigned long>(data.size()));
    jpeg_read_header(&cinfo, TRUE);
    cinfo.out_color_space = JCS_RGB;
    jpeg_start_decompress(&cinfo);
    if (cinfo.output_width != width || cinfo.output_height != height || cinfo.output_components != 3) {
        jpeg_destroy_decompress(&cinfo);
        throw CorruptPayload("JPEG dimensions differ from the declared frame size");
    }
    frame.width = width;
    frame.height = height;
    frame.data.resize(std::size_t { width } * height * 3);
    const std::size_t stride = std::size_t { width } * 3;
    while (cinfo.output_scanline < cinfo.output_height) {
        JSAMPROW row = frame.data.data() + cinfo.output_scanline * stride;
        jpeg_read_scanlines(&cinfo, &row, 1);
    }
    jpeg_finish_decompress(&cinfo);
    // Truncated or damaged streams decode with warnings rather than errors.
    const long warnings = err.mgr.num_warnings;
    jpeg_destroy_decompress(&cinfo);
    if (warnings > 0) {
        throw CorruptPayload("JPEG data is truncated or damaged");
    }
    return frame;
}

constexpr std::array<std::int8_t, 256> kBase64Values = [] {
    std::array<std::int8_t, 256> t {};
    t.fill(-1);
    constexpr std::string_view alphabet = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
    for (std::size_t i = 0; i < alphabet.size(); ++i) {
        t[static_cast<std::uint8_t>(alphabet[i])] = static_cast<std::int8_t>(i);
    }
    return t;
}();

int base64_value(std::uint8_t c)
{
    return kBase64Values[c];
}

} // namespace

std::string Resolution::name() const
{
    if (*this == k480p) {
        return "480p";
    }
    if (*this == k720p) {
        return "720p";
    }
    if (*this == k1080p) {
        return "1080p";
    }
    return std::to_string(width) + "x" + std::to_string(height);
}

std::optional<Resolution> parse_resolution(std::string_view s)
{
    for (const Resolution r : { k480p, k720p, k1080p }) {
        if (s == r.name()) {
            return r;
        }
    }
    const std::size_t x = s.find('x');
    if (x == std::string_view::npos) {
        return std::nullopt;
    }
    Resolution r;
    const auto [p1, e1] = std::from_chars(s.data(), s.data() + x, r.width);
    const auto [p2, e2] = std::from_chars(s.data() + x + 1, s.data() + s.size(), r.height);
    if (e1 != std::errc {} || e2 != std::errc {} || p1 != s.data() + x || p2 != s.data() + s.size() ||
        r.width == 0 || r.height == 0 || r.width > 16384 || r.height > 16384) {
        return std::nullopt;
    }
    return r;
}

const char* to_string(Codec c)
{
    return c == Codec::Raw ? "raw" : "jpeg";
}

std::optional<Codec> codec_from_string(std::string_view s)
{
    if (s == "raw" || s == "RAW") {
        return Codec::Raw;
    }
    if (s == "jpeg" || s == "JPEG") {
        return Codec::Jpeg;
    }
    return std::nullopt;
}

Bytes base64_encode(ByteView data)
{
    Bytes out(4 * ((data.size() + 2) / 3) + 1);
    const int n = EVP_EncodeBlock(out.data(), data.data(), static_cast<int>(data.size()));
    out.resize(static_cast<std::size_t>(n));
    return out;
}

std::optional<Bytes> base64_decode(ByteView text)
{
    if (text.size() % 4 != 0) {
        return std::nullopt;
    }
    if (text.empty()) {
        return Bytes {};
    }
    std::size_t pad = 0;
    while (pad < 2 && text[text.size() - 1 - pad] == '=') {
        ++pad;
    }
    const std::size_t data_chars = text.size() - pad;
    // Unused low bits of the last data character must be zero.
    const int last = base64_value(text[data_chars - 1]);
    if ((pad == 1 && (last & 0x3) != 0) || (pad == 2 && (last & 0xf) != 0)) {
        return std::nullopt;
    }
    Bytes out(text.size() / 4 * 3 - pad);
    const std::size_t full = pad == 0 ? text.size() / 4 : text.size() / 4 - 1;
    std::int32_t any_invalid = 0;
    std::uint8_t* o = out.data();
    const std::uint8_t* t = text.data();
    for (std::size_t q = 0; q < full; ++q, t += 4, o += 3) {
        const std::int32_t a = kBase64Values[t[0]];
        const std::int32_t b = kBase64Values[t[1]];
        const std::int32_t c = kBase64Values[t[2]];
        const std::int32_t d = kBase64Values[t[3]];
        any_invalid |= a | b | c | d;
        const std::uint32_t v = (static_cast<std::uint32_t>(a) << 18) | (static_cast<std::uint32_t>(b) << 12) |
                                (static_cast<std::uint32_t>(c) << 6) | static_cast<std::uint32_t>(d);
        o[0] = static_cast<std::uint8_t>(v >> 16);
        o[1] = static_cast<std::uint8_t>(v >> 8);
        o[2] = static_cast<std::uint8_t>(v);
    }
    if (pad > 0) {
        std::uint32_t v = 0;
        for (std::size_t i = 0; i < 4 - pad; ++i) {
            const std::int32_t x = kBase64Values[t[i]];
            any_invalid |= x;
            v |= static_cast<std::uint32_t>(x) << (18 - 6 * i);
        }
        o[0] = static_cast<std::uint8_t>(v >> 16);
        if (pad == 1) {
            o[1] = static_cast<std::uint8_t>(v >> 8);
        }
    }
    if (any_invalid < 0) {
        return std::nullopt;
    }
    return out;
}

EncodedFrame encode_frame(const Frame& f, Codec codec, int quality, bool base64)
{
    if (!f.valid()) {
        throw std::invalid_argument("frame data size does not match its dimensions");
    }
    if (quality < 1 || quality > 100) {
        throw std::invalid_argument("JPEG quality must be in 1..100");
    }
    EncodedFrame e;
    e.codec = codec;
    e.base64_wrapped = base64;
    e.width = f.width;
    e.height = f.height;
    if (codec == Codec::Raw) {
        e.payload = base64 ? base64_encode(f.data) : f.data;
        return e;
    }
    Bytes coded = jpeg_encode(f, quality);
    e.payload = base64 ? base64_encode(coded) : std::move(coded);
    return e;
}

Frame decode_frame(const EncodedFrame& e)
{
    std::optional<Bytes> unwrapped;
    ByteView coded = e.payload;
    if (e.base64_wrapped) {
        unwrapped = base64_decode(e.payload);
        if (!unwrapped) {
            throw CorruptPayload("malformed base64 payload");
        }
        coded = *unwrapped;
    }
    if (e.codec == Codec::Jpeg) {
        return jpeg_decode(coded, e.width, e.height);
    }
    Frame f;
    f.width = e.width;
    f.height = e.height;
    if (coded.size() != std::size_t { e.width } * e.height * 3) {
        throw CorruptPayload("raw payload size does not match the declared frame size");
    }
    f.data = unwrapped ? std::move(*unwrapped) : Bytes(coded.begin(), coded.end());
    return f;
}

std::uint32_t capture_timestamp(std::size_t i, double fps)
{
    return static_cast<std::uint32_t>(static_cast<std::uint64_t>(std::llround(static_cast<double>(i) * 90000.0 / fps)));
}

// Synthetic sources

const char* to_string(Motion m)
{
    return m == Motion::StaticTraffic ? "static" : "handheld";
}

std::optional<Motion> motion_from_string(std::string_view s)
{
    if (s == "static") {
        return Motion::StaticTraffic;
    }
    if (s == "handheld") {
        return Motion::Handheld;
    }
    return std::nullopt;
}

SyntheticSource::SyntheticSource(Resolution res, std::uint64_t seed, Motion motion, std::size_t frame_count,
                                 double fps)
    : res_(res)
    , seed_(seed)
    , motion_(motion)
    , frame_count_(frame_count)
    , fps_(fps)
    , rng_(seed)
{
    if (res.width == 0 || res.height == 0 || !(fps > 0)) {
        throw std::invalid_argument("synthetic source needs a non-empty resolution and positive fps");
    }
    if (motion_ == Motion::StaticTraffic) {
        scene_w_ = res.width;
        scene_h_ = res.height;
        background_ = render_scene(scene_w_, scene_h_, rng_, 40, 3);
    } else {
        const std::uint32_t margin = std::max(res.width / 16, 2u);
        scene_w_ = res.width + 2 * margin;
        scene_h_ = res.height + 2 * margin;
        background_ = render_scene(scene_w_, scene_h_, rng_, 160, 10);
        cam_x_ = margin;
        cam_y_ = margin;
    }
}

std::optional<Frame> SyntheticSource::next()
{
    if (frame_count_ != 0 && produced_ >= frame_count_) {
        return std::nullopt;
    }
    Frame f;
    f.width = res_.width;
    f.height = res_.height;
    f.capture_ts = capture_timestamp(produced_, fps_);
    f.data.resize(res_.frame_bytes());
    if (motion_ == Motion::StaticTraffic) {
        render_static(f.data);
    } else {
        render_handheld(f.data);
    }
    ++produced_;
    return f;
}

// Fixed background with a few blocks moving along horizontal lanes.
void SyntheticSource::render_static(Bytes& out)
{
    std::memcpy(out.data(), background_.data(), out.size());
    std::uint64_t lane_rng = seed_ ^ 0x5bd1e995ULL;
    const std::uint32_t bw = std::max(res_.width / 20, 1u);
    const std::uint32_t bh = std::max(res_.height / 24, 1u);
    for (int car = 0; car < 6; ++car) {
        const std::uint32_t lane_y = static_cast<std::uint32_t>(splitmix64(lane_rng) % std::max(res_.height - bh, 1u));
        const double speed = 1.0 + static_cast<double>(splitmix64(lane_rng) % 4);
        const std::uint32_t start = static_cast<std::uint32_t>(splitmix64(lane_rng) % res_.width);
        const std::uint64_t colour = splitmix64(lane_rng);
        const std::uint32_t x0 =
            static_cast<std::uint32_t>(start + static_cast<std::uint64_t>(speed * static_cast<double>(produced_))) %
            res_.width;
        for (std::uint32_t y = lane_y; y < std::min(res_.height, lane_y + bh); ++y) {
            for (std::uint32_t x = x0; x < std::min(res_.width, x0 + bw); ++x) {
                std::uint8_t* p = &out[(std::size_t { y } * res_.width + x) * 3];
                p[0] = static_cast<std::uint8_t>(colour);
                p[1] = static_cast<std::uint8_t>(colour >> 8);
                p[2] = static_cast<std::uint8_t>(colour >> 16);
            }
        }
    }
}

// Shaking camera over a larger scene with per-frame sensor noise. The noise
// strength drifts over a few seconds, so compressed sizes (and FPS measured
// over a 1 s window) wander.
void SyntheticSource::render_handheld(Bytes& out)
{
    const double margin = (scene_w_ - res_.width) / 2.0;
    const double step = std::max(margin / 4.0, 1.0);
    cam_x_ = std::clamp(cam_x_ + (uniform01(rng_) * 2 - 1) * step, 0.0, 2 * margin);
    cam_y_ = std::clamp(cam_y_ + (uniform01(rng_) * 2 - 1) * step, 0.0, 2 * margin);
    const auto ox = static_cast<std::uint32_t>(cam_x_);
    const auto oy = static_cast<std::uint32_t>(cam_y_);
    const std::size_t row = std::size_t { res_.width } * 3;
    for (std::uint32_t y = 0; y < res_.height; ++y) {
        std::memcpy(&out[y * row], &background_[((std::size_t { oy } + y) * scene_w_ + ox) * 3], row);
    }

    const double phase = static_cast<double>(produced_) * 0.02;
    const int amplitude =
        2 + static_cast<int>(22.0 * std::abs(std::sin(phase)) * (0.5 + 0.5 * uniform01(rng_)));
    const std::uint64_t span = 2 * static_cast<std::uint64_t>(amplitude) + 1;
    std::size_t i = 0;
    while (i < out.size()) {
        std::uint64_t r = splitmix64(rng_);
        for (int k = 0; k < 8 && i < out.size(); ++k, ++i) {
            const int n = static_cast<int>((r & 0xff) * span >> 8) - amplitude;
            out[i] = clamp_u8(out[i] + n);
            r >>= 8;
        }
    }
}

// Manifest sources

ManifestSource::ManifestSource(const std::filesystem::path& manifest, double fps)
    : fps_(fps)
{
    std::ifstream in(manifest);
    if (!in) {
        throw ManifestError("cannot open manifest " + manifest.string());
    }
    std::string header;
    std::getline(in, header);
    if (!header.empty() && header.back() == '\r') {
        header.pop_back();
    }
    constexpr std::string_view kPrefix = "resolution=";
    constexpr std::string_view kFormat = " format=RGB24";
    if (header.rfind(kPrefix, 0) != 0 || header.size() <= kPrefix.size() + kFormat.size() ||
        header.compare(header.size() - kFormat.size(), kFormat.size(), kFormat) != 0) {
        throw ManifestError("manifest header must be 'resolution=<W>x<H> format=RGB24'");
    }
    const auto res = parse_resolution(
        std::string_view(header).substr(kPrefix.size(), header.size() - kPrefix.size() - kFormat.size()));
    if (!res) {
        throw ManifestError("manifest header has an invalid resolution");
    }
    res_ = *res;

    const auto base = manifest.parent_path();
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) {
            continue;
        }
        const auto path = base / line;
        std::error_code ec;
        const auto size = std::filesystem::file_size(path, ec);
        if (ec) {
            throw ManifestError("manifest entry '" + line + "' is missing");
        }
        if (size != res_.frame_bytes()) {
            throw ManifestError("manifest entry '" + line + "' has " + std::to_string(size) + " bytes, expected " +
                                std::to_string(res_.frame_bytes()));
        }
        entries_.push_back(path);
    }
}

std::optional<Frame> ManifestSource::next()
{
    if (position_ >= entries_.size()) {
        return std::nullopt;
    }
    Frame f;
    f.width = res_.width;
    f.height = res_.height;
    f.capture_ts = capture_timestamp(position_, fps_);
    f.data.resize(res_.frame_bytes());
    std::ifstream in(entries_[position_], std::ios::binary);
    if (!in.read(reinterpret_cast<char*>(f.data.data()), static_cast<std::streamsize>(f.data.size()))) {
        throw ManifestError("cannot read manifest entry " + entries_[position_].string());
    }
    ++position_;
    return f;
}

std::filesystem::path write_manifest(const std::filesystem::path& directory, const std::vector<Frame>& frames)
{
    if (frames.empty()) {
        throw ManifestError("no frames to write");
    }
    std::filesystem::create_directories(directory);
    const auto manifest = directory / "manifest.txt";
    std::ofstream out(manifest);
    out << "resolution=" << frames[0].width << "x" << frames[0].height << " format=RGB24\n";
    for (std::size_t i = 0; i < frames.size(); ++i) {
        if (!frames[i].valid() || frames[i].resolution() != frames[0].resolution()) {
            throw ManifestError("frames differ in resolution");
        }
        char name[32];
        std::snprintf(name, sizeof(name), "frame_%05zu.rgb", i);
        std::ofstream(directory / name, std::ios::binary)
            .write(reinterpret_cast<const char*>(frames[i].data.data()),
                   static_cast<std::streamsize>(frames[i].data.size()));
        out << name << "\n";
    }
    if (!out) {
        throw ManifestError("cannot write manifest " + manifest.string());
    }
    return manifest;
}

} // namespace vsrtp
