#include "cli.hpp"

#include "vsrtp/bench.hpp"
#include "vsrtp/control_channel.hpp"
#include "vsrtp/keys.hpp"
#include "vsrtp/session.hpp"
#include "vsrtp/transport.hpp"

#include <spdlog/sinks/ostream_sink.h>
#include <spdlog/spdlog.h>

#include <atomic>
#include <condition_variable>
#include <cstdio>
#include <mutex>
#include <ostream>
#include <thread>

namespace vsrtp::cli {

namespace {

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Routes library logging to the error stream for the duration of one run.
class LogRedirect {
public:
    explicit LogRedirect(std::ostream& err)
        : previous_(spdlog::default_logger())
    {
        auto sink = std::make_shared<spdlog::sinks::ostream_sink_mt>(err, true);
        auto logger = std::make_shared<spdlog::logger>("vsrtp", sink);
        logger->set_pattern("[%l] %v");
        spdlog::set_default_logger(logger);
    }
    ~LogRedirect() { spdlog::set_default_logger(previous_); }

    LogRedirect(const LogRedirect&) = delete;
    LogRedirect& operator=(const LogRedirect&) = delete;

private:
    std::shared_ptr<spdlog::logger> previous_;
};

std::string hex64(std::uint64_t v)
{
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

Codec parse_codec(const std::string& s)
{
    const auto c = codec_from_string(s);
    if (!c) {
        throw UsageError("unknown codec: " + s);
    }
    return *c;
}

// Only the per-packet IV is available to live sessions.
IvMode session_iv_mode(const CliConfig& c)
{
    const auto mode = iv_mode_from_string(c.iv_mode);
    if (!mode) {
        throw UsageError("unknown iv mode: " + c.iv_mode);
    }
    if (*mode != IvMode::UniquePerPacket) {
        throw UsageError("iv mode " + c.iv_mode + " is only accepted by bench with --allow-insecure-iv");
    }
    return *mode;
}

// "synthetic:<res>[:static|handheld]" or a manifest path.
std::unique_ptr<FrameSource> make_source(const CliConfig& c)
{
    const double fps = c.fps > 0 ? c.fps : 30.0;
    constexpr std::string_view prefix = "synthetic:";
    if (c.source.rfind(prefix, 0) != 0) {
        return std::make_unique<ManifestSource>(c.source, fps);
    }
    std::string descriptor = c.source.substr(prefix.size());
    Motion motion = Motion::StaticTraffic;
    if (const auto colon = descriptor.find(':'); colon != std::string::npos) {
        const auto m = motion_from_string(descriptor.substr(colon + 1));
        if (!m) {
            throw UsageError("unknown motion in source: " + c.source);
        }
        motion = *m;
        descriptor.resize(colon);
    }
    const auto res = parse_resolution(descriptor);
    if (!res) {
        throw UsageError("unknown resolution in source: " + c.source);
    }
    return std::make_unique<SyntheticSource>(*res, c.seed, motion, c.frames, fps);
}

std::string host_of(const std::string& address)
{
    return address.substr(0, address.rfind(':'));
}

int run_stream(const CliConfig& c, std::ostream& out, std::ostream& err)
{
    const IvMode mode = session_iv_mode(c);
    StreamOptions options;
    options.codec = parse_codec(c.codec);
    options.quality = c.quality;
    options.base64 = !c.no_base64;
    options.max_frames = c.frames;
    if (c.fps > 0) {
        options.pacing = PacingPolicy { c.fps, 0 };
    }
    auto source = make_source(c);

    const FileKeyProvider provider(c.key_file);
    SessionRegistry registry;
    TcpListener listener(c.host, c.control_port);
    out << "control listening on " << c.host << ":" << listener.port() << std::endl;

    auto channel = listener.accept(std::chrono::seconds(c.accept_timeout_s));
    if (!channel) {
        err << "stream: no client connected within " << c.accept_timeout_s << " s\n";
        return kExitRuntime;
    }
    const std::string peer = host_of(channel->peer_address());

    ServerContext ctx { provider, registry, {}, peer };
    ctx.resource_exists = [&](std::string_view uri) { return uri == c.uri; };
    ControlServerSession session(*channel, ctx);

    std::mutex mutex;
    std::condition_variable cv;
    std::optional<SessionState> playing;
    bool ended = false;
    std::atomic<bool> active { false };
    std::atomic<bool> stop { false };

    session.on_transition([&](const SessionState& before, const SessionState& after, const ControlRequest&) {
        const std::lock_guard lock(mutex);
        active = after.phase == SessionPhase::Playing;
        if (active && !playing) {
            playing = after;
        }
        if (after.phase == SessionPhase::Init && before.phase != SessionPhase::Init) {
            ended = true;
        }
        cv.notify_all();
    });
    std::thread control([&] {
        session.serve([&] { return stop.load(); });
        const std::lock_guard lock(mutex);
        ended = true;
        active = false;
        cv.notify_all();
    });
    auto finish = [&] {
        stop = true;
        control.join();
    };

    {
        std::unique_lock lock(mutex);
        cv.wait(lock, [&] { return playing || ended; });
        if (!playing) {
            lock.unlock();
            finish();
            err << "stream: session ended before PLAY\n";
            return kExitRuntime;
        }
    }

    StreamStats stats;
    try {
        auto udp = UdpChannel::connect(peer, playing->rtp_port);
        if (!c.quiet) {
            options.on_frame = [&](std::size_t frame, std::uint32_t ts, ByteView payload) {
                out << "frame " << frame << " ts=" << ts << " bytes=" << payload.size()
                    << " digest=" << hex64(frame_digest(payload)) << '\n';
            };
        }
        options.active = [&] { return active.load(); };
        stats = stream_session(*source, *playing, *udp, options, mode);
    } catch (...) {
        finish();
        throw;
    }
    out << "sent frames=" << stats.frames.size() << " packets=" << stats.packets_sent << " bytes=" << stats.bytes_sent
        << std::endl;

    {
        std::unique_lock lock(mutex);
        cv.wait_for(lock, std::chrono::seconds(c.accept_timeout_s), [&] { return ended; });
    }
    finish();
    return kExitOk;
}

int run_receive(const CliConfig& c, std::ostream& out, std::ostream& err)
{
    ReceiverOptions options;
    options.mode = session_iv_mode(c);
    options.codec = parse_codec(c.codec);
    options.base64 = !c.no_base64;
    const auto res = parse_resolution(c.resolution);
    if (!res) {
        throw UsageError("unknown resolution: " + c.resolution);
    }
    options.resolution = *res;

    const FileKeyProvider provider(c.key_file);
    auto udp = UdpChannel::bind("", c.rtp_port);
    auto channel = TcpControlChannel::connect(c.host, c.control_port, std::chrono::seconds(c.accept_timeout_s));
    ControlClient client(*channel, provider);
    const SessionKeys keys = client.setup(c.uri, udp->local_port());
    client.play();

    StreamReceiver receiver(keys, options);
    std::size_t n = 0;
    run_receiver(
        *udp, receiver,
        [&](const ReceivedFrame& f) {
            if (!c.quiet) {
                out << "frame " << n << " ts=" << f.timestamp << " bytes=" << f.payload.size()
                    << " digest=" << hex64(frame_digest(f.payload));
                if (f.frame) {
                    out << " decoded=" << hex64(frame_digest(f.frame->data));
                }
                out << '\n';
            }
            ++n;
        },
        std::chrono::milliseconds(c.idle_ms), c.expect_frames);
    receiver.finish();

    try {
        client.teardown();
    } catch (const ControlError& e) {
        err << "receive: teardown failed: " << e.what() << '\n';
    }

    const ReceiverStats s = receiver.stats();
    out << "summary: frames_ok=" << s.frames_ok << " frames_corrupt=" << s.frames_corrupt
        << " datagrams=" << s.datagrams << " auth_failures=" << s.auth_failures << " replay_drops=" << s.replay_drops
        << " malformed=" << s.malformed << std::endl;
    if (s.frames_ok == 0) {
        err << "receive: no frames verified\n";
        return kExitRuntime;
    }
    if (c.expect_frames > 0 && s.frames_ok < c.expect_frames) {
        err << "receive: expected " << c.expect_frames << " frames, got " << s.frames_ok << '\n';
        return kExitRuntime;
    }
    return kExitOk;
}

int run_bench(const CliConfig& c, bool iv_given, std::ostream& out)
{
    BenchConfig config = load_config(c.config_path);
    if (!c.output_dir.empty()) {
        config.output_dir = c.output_dir;
    }
    if (iv_given) {
        const auto mode = iv_mode_from_string(c.iv_mode);
        if (!mode) {
            throw UsageError("unknown iv mode: " + c.iv_mode);
        }
        config.iv_mode = *mode;
    }
    if (config.iv_mode != IvMode::UniquePerPacket && !c.allow_insecure_iv) {
        throw UsageError(std::string("iv mode ") + to_string(config.iv_mode) + " requires --allow-insecure-iv");
    }
    const ExperimentResult result = run_experiment(config);
    write_outputs(result, config.output_dir);
    out << format_summary(result.summary);
    out << "wrote " << result.records.size() << " records to " << config.output_dir.string() << std::endl;
    return kExitOk;
}

void add_session_options(CLI::App& app, CliConfig& c)
{
    app.add_option("--uri", c.uri, "Resource URI negotiated in SETUP")->capture_default_str();
    app.add_option("--host", c.host, "Control address (stream: bind, receive: connect)")->capture_default_str();
    app.add_option("--control-port", c.control_port, "TCP control port; 0 picks a free port when streaming")
        ->capture_default_str();
    app.add_option("--key-file", c.key_file, "Master key file with lines `uri=<uri> key=<64 hex>`")
        ->required()
        ->check(CLI::ExistingFile);
    app.add_option("--codec", c.codec, "Payload codec")
        ->check(CLI::IsMember({ "raw", "jpeg" }))
        ->capture_default_str();
    app.add_flag("--no-base64", c.no_base64, "Send codec output without base64 wrapping");
    app.add_option("--iv-mode", c.iv_mode, "Packet IV construction; only unique-per-packet is accepted here")
        ->capture_default_str();
    app.add_option("--timeout", c.accept_timeout_s, "Seconds to wait for the control connection")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    app.add_flag("--quiet", c.quiet, "Suppress per-frame digest lines");
}

} // namespace

std::unique_ptr<CLI::App> make_app(CliConfig& c)
{
    auto app = std::make_unique<CLI::App>("Encrypted real-time video streaming and benchmarks", "vsrtp");
    app->require_subcommand(1);

    CLI::App* stream = app->add_subcommand("stream", "Serve one session from a frame source");
    add_session_options(*stream, c);
    stream->add_option("--source", c.source, "synthetic:<480p|720p|1080p|WxH>[:static|handheld] or a manifest path")
        ->capture_default_str();
    stream->add_option("--quality", c.quality, "JPEG quality")->check(CLI::Range(1, 100))->capture_default_str();
    stream->add_option("--frames", c.frames, "Frames to send; 0 sends the whole source")->capture_default_str();
    stream->add_option("--fps", c.fps, "Pacing rate; 0 sends as fast as possible")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
    stream->add_option("--seed", c.seed, "Synthetic source seed")->capture_default_str();

    CLI::App* receive = app->add_subcommand("receive", "Connect, play, verify and decode one session");
    add_session_options(*receive, c);
    receive->add_option("--rtp-port", c.rtp_port, "Local UDP port; 0 picks a free port")->capture_default_str();
    receive->add_option("--resolution", c.resolution, "Expected frame size: 480p, 720p, 1080p or WxH")
        ->capture_default_str();
    receive->add_option("--expect-frames", c.expect_frames, "Stop after this many frames; fewer is an error")
        ->capture_default_str();
    receive->add_option("--idle-ms", c.idle_ms, "Stop after this long without datagrams")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();

    CLI::App* bench = app->add_subcommand("bench", "Run an experiment config and write CSV and plot data");
    bench->add_option("--config", c.config_path, "Experiment config file (key = value lines)")
        ->required()
        ->check(CLI::ExistingFile);
    bench->add_option("--output-dir", c.output_dir, "Overrides output_dir from the config");
    bench->add_option("--iv-mode", c.iv_mode, "Overrides iv_mode from the config");
    bench->add_flag("--allow-insecure-iv", c.allow_insecure_iv, "Permit the session-constant IV for measurements");
    return app;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    CliConfig config;
    auto app = make_app(config);
    try {
        app->parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app->exit(e, out, err) == 0 ? kExitOk : kExitUsage;
    }

    const LogRedirect logs(err);
    try {
        if (app->got_subcommand("stream")) {
            return run_stream(config, out, err);
        }
        if (app->got_subcommand("receive")) {
            return run_receive(config, out, err);
        }
        const bool iv_given = app->get_subcommand("bench")->count("--iv-mode") > 0;
        return run_bench(config, iv_given, out);
    } catch (const UsageError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
}

} // namespace vsrtp::cli
