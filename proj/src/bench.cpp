#include "vsrtp/bench.hpp"
#include "vsrtp/transport.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <numeric>
#include <random>
#include <ostream>
#include <sstream>
#include <thread>

namespace vsrtp {

namespace {

std::string_view trim(std::string_view s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) {
        return {};
    }
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string_view> split(std::string_view s, char sep)
{
    std::vector<std::string_view> out;
    for (;;) {
        const auto pos = s.find(sep);
        out.push_back(trim(s.substr(0, pos)));
        if (pos == std::string_view::npos) {
            return out;
        }
        s.remove_prefix(pos + 1);
    }
}

template <typename T>
T parse_number(std::string_view key, std::string_view v)
{
    T value {};
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), value);
    if (ec != std::errc {} || ptr != v.data() + v.size()) {
        throw ConfigError("invalid number for '" + std::string(key) + "': '" + std::string(v) + "'");
    }
    return value;
}

bool parse_bool(std::string_view key, std::string_view v)
{
    if (v == "true" || v == "on" || v == "1" || v == "yes") {
        return true;
    }
    if (v == "false" || v == "off" || v == "0" || v == "no") {
        return false;
    }
    throw ConfigError("invalid boolean for '" + std::string(key) + "': '" + std::string(v) + "'");
}

double probability(std::string_view key, std::string_view v)
{
    const double p = parse_number<double>(key, v);
    if (!(p >= 0.0 && p <= 1.0)) {
        throw ConfigError("'" + std::string(key) + "' must be in [0, 1]");
    }
    return p;
}

Resolution resolution_value(std::string_view key, std::string_view v)
{
    const auto r = parse_resolution(v);
    if (!r) {
        throw ConfigError("invalid resolution for '" + std::string(key) + "': '" + std::string(v) + "'");
    }
    return *r;
}

Codec codec_value(std::string_view key, std::string_view v)
{
    const auto c = codec_from_string(v);
    if (!c) {
        throw ConfigError("invalid codec for '" + std::string(key) + "': '" + std::string(v) + "'");
    }
    return *c;
}

std::string fmt3(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.3f", v);
    return buf;
}

double micros(std::chrono::nanoseconds ns)
{
    // Rounded to the nanosecond grid the CSV keeps.
    return std::round(static_cast<double>(ns.count())) / 1000.0;
}

std::uint64_t resolution_area(const std::string& name)
{
    const auto r = parse_resolution(name);
    return r ? std::uint64_t { r->width } * r->height : 0;
}

double percentile(const std::vector<double>& sorted, double q)
{
    const double rank = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(rank));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (sorted[hi] - sorted[lo]) * (rank - static_cast<double>(lo));
}

double variance(const Stats& s)
{
    return s.stddev * s.stddev;
}

std::vector<double> skip_warmup(const std::vector<double>& arrivals, std::size_t warmup)
{
    if (arrivals.size() <= warmup + 1) {
        return arrivals;
    }
    return { arrivals.begin() + static_cast<std::ptrdiff_t>(warmup), arrivals.end() };
}

double mean_frame_delta(Resolution res, std::uint64_t seed, Motion motion, std::size_t frames)
{
    SyntheticSource src(res, seed, motion, std::max<std::size_t>(frames, 2));
    Bytes prev = src.next()->data;
    double total = 0;
    std::size_t n = 0;
    while (auto f = src.next()) {
        std::uint64_t s = 0;
        for (std::size_t i = 0; i < prev.size(); ++i) {
            s += static_cast<std::uint64_t>(std::abs(int(prev[i]) - int(f->data[i])));
        }
        total += static_cast<double>(s) / static_cast<double>(prev.size());
        ++n;
        prev = std::move(f->data);
    }
    return total / static_cast<double>(n);
}

} // namespace

const char* to_string(SecuredMode m)
{
    switch (m) {
    case SecuredMode::On:
        return "on";
    case SecuredMode::Off:
        return "off";
    case SecuredMode::Both:
        return "both";
    }
    return "?";
}

BenchConfig parse_config(std::string_view text)
{
    BenchConfig c;
    std::size_t line_no = 0;
    for (std::string_view line : split(text, '\n')) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) {
            line = trim(line.substr(0, hash));
        }
        if (line.empty()) {
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
        }
        const std::string_view key = trim(line.substr(0, eq));
        const std::string_view v = trim(line.substr(eq + 1));

        if (key == "source") {
            const auto m = motion_from_string(v);
            if (!m) {
                throw ConfigError("source must be 'static' or 'handheld'");
            }
            c.source = *m;
        } else if (key == "resolutions") {
            c.resolutions.clear();
            for (const auto item : split(v, ',')) {
                c.resolutions.push_back(resolution_value(key, item));
            }
        } else if (key == "codecs") {
            c.codecs.clear();
            for (const auto item : split(v, ',')) {
                c.codecs.push_back(codec_value(key, item));
            }
        } else if (key == "secured") {
            if (v == "on") {
                c.secured = SecuredMode::On;
            } else if (v == "off") {
                c.secured = SecuredMode::Off;
            } else if (v == "both") {
                c.secured = SecuredMode::Both;
            } else {
                throw ConfigError("secured must be on, off or both");
            }
        } else if (key == "frames") {
            c.frames = parse_number<std::size_t>(key, v);
        } else if (key == "seed") {
            c.seed = parse_number<std::uint64_t>(key, v);
        } else if (key == "quality") {
            c.quality = parse_number<int>(key, v);
            if (c.quality < 1 || c.quality > 100) {
                throw ConfigError("quality must be in 1..100");
            }
        } else if (key == "base64") {
            c.base64 = parse_bool(key, v);
        } else if (key == "pace_fps") {
            c.pace_fps = parse_number<double>(key, v);
            if (!(c.pace_fps >= 0)) {
                throw ConfigError("pace_fps must be >= 0");
            }
        } else if (key == "warmup") {
            c.warmup = parse_number<std::size_t>(key, v);
        } else if (key == "iv_mode") {
            const auto m = iv_mode_from_string(v);
            if (!m) {
                throw ConfigError("iv_mode must be unique-per-packet or session-constant");
            }
            c.iv_mode = *m;
        } else if (key == "channel") {
            if (v == "loopback") {
                c.channel = BenchChannel::Loopback;
            } else if (v == "netsim") {
                c.channel = BenchChannel::Netsim;
            } else {
                throw ConfigError("channel must be loopback or netsim");
            }
        } else if (key == "loss") {
            c.fault.loss_prob = probability(key, v);
        } else if (key == "dup") {
            c.fault.dup_prob = probability(key, v);
        } else if (key == "corrupt") {
            c.fault.corrupt_prob = probability(key, v);
        } else if (key == "reorder_window") {
            c.fault.reorder_window = parse_number<std::size_t>(key, v);
        } else if (key == "delay_min_ms") {
            c.fault.delay_min_ms = parse_number<double>(key, v);
        } else if (key == "delay_max_ms") {
            c.fault.delay_max_ms = parse_number<double>(key, v);
        } else if (key == "trace_frames") {
            c.trace_frames = parse_number<std::size_t>(key, v);
        } else if (key == "trace_resolution") {
            c.trace_resolution = resolution_value(key, v);
        } else if (key == "trace_codec") {
            c.trace_codec = codec_value(key, v);
        } else if (key == "output_dir") {
            c.output_dir = std::string(v);
        } else {
            throw ConfigError("unknown key '" + std::string(key) + "'");
        }
    }
    if (c.resolutions.empty() || c.codecs.empty()) {
        throw ConfigError("resolutions and codecs must not be empty");
    }
    if (c.frames == 0) {
        throw ConfigError("frames must be positive");
    }
    try {
        c.fault.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    return c;
}

BenchConfig load_config(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open config " + path.string());
    }
    std::ostringstream text;
    text << in.rdbuf();
    return parse_config(text.str());
}

// CSV

void write_csv(std::ostream& out, const std::vector<MetricsRecord>& records)
{
    out << kCsvHeader << '\n';
    for (const MetricsRecord& r : records) {
        out << r.frame << ',' << r.resolution << ',' << to_string(r.codec) << ',' << (r.secured ? 1 : 0) << ','
            << fmt3(r.t_encode_us) << ',' << fmt3(r.t_encrypt_us) << ',' << fmt3(r.t_tag_us) << ','
            << fmt3(r.t_total_us) << ',' << r.payload_bytes << '\n';
    }
}

std::vector<MetricsRecord> read_csv(std::istream& in)
{
    std::string line;
    if (!std::getline(in, line) || trim(line) != kCsvHeader) {
        throw ConfigError("CSV header does not match the expected schema");
    }
    std::vector<MetricsRecord> out;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) {
            continue;
        }
        const auto f = split(line, ',');
        if (f.size() != 9) {
            throw ConfigError("CSV line " + std::to_string(line_no) + " has " + std::to_string(f.size()) +
                              " fields");
        }
        MetricsRecord r;
        r.frame = parse_number<std::size_t>("frame", f[0]);
        r.resolution = std::string(f[1]);
        r.codec = codec_value("codec", f[2]);
        r.secured = parse_bool("secured", f[3]);
        r.t_encode_us = parse_number<double>("t_encode_us", f[4]);
        r.t_encrypt_us = parse_number<double>("t_encrypt_us", f[5]);
        r.t_tag_us = parse_number<double>("t_tag_us", f[6]);
        r.t_total_us = parse_number<double>("t_total_us", f[7]);
        r.payload_bytes = parse_number<std::size_t>("payload_bytes", f[8]);
        out.push_back(std::move(r));
    }
    return out;
}

// Statistics

std::vector<FpsSample> fps_samples(const std::vector<double>& arrivals_s, double window_s)
{
    std::vector<FpsSample> out;
    if (arrivals_s.size() < 2) {
        return out;
    }
    const double t0 = arrivals_s.front();
    std::size_t lo = 0;
    for (std::size_t i = 0; i < arrivals_s.size(); ++i) {
        const double t = arrivals_s[i];
        if (t - window_s < t0) {
            continue;
        }
        while (arrivals_s[lo] <= t - window_s) {
            ++lo;
        }
        FpsSample s;
        s.window_start_s = t - window_s;
        s.window_s = window_s;
        s.frames_in_window = i - lo + 1;
        s.fps = static_cast<double>(s.frames_in_window) / window_s;
        out.push_back(s);
    }
    if (out.empty()) {
        const double span = arrivals_s.back() - t0;
        if (span > 0) {
            FpsSample s;
            s.window_start_s = t0;
            s.window_s = span;
            s.frames_in_window = arrivals_s.size() - 1;
            s.fps = static_cast<double>(s.frames_in_window) / span;
            out.push_back(s);
        }
    }
    return out;
}

Stats describe(std::vector<double> values)
{
    if (values.empty()) {
        throw EmptyInput("no values to describe");
    }
    std::sort(values.begin(), values.end());
    Stats s;
    s.n = values.size();
    s.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(s.n);
    s.median = percentile(values, 0.5);
    s.p95 = percentile(values, 0.95);
    if (s.n > 1) {
        double ss = 0;
        for (const double v : values) {
            ss += (v - s.mean) * (v - s.mean);
        }
        s.stddev = std::sqrt(ss / static_cast<double>(s.n - 1));
    }
    return s;
}

Summary aggregate(const std::vector<MetricsRecord>& records, const std::map<CellKey, std::vector<FpsSample>>& fps,
                  std::size_t warmup)
{
    if (records.empty()) {
        throw EmptyInput("no records to aggregate");
    }
    std::map<CellKey, std::vector<const MetricsRecord*>> cells;
    for (const MetricsRecord& r : records) {
        cells[{ r.resolution, r.codec, r.secured }].push_back(&r);
    }

    Summary summary;
    for (auto& [key, rows] : cells) {
        std::vector<const MetricsRecord*> kept;
        for (const MetricsRecord* r : rows) {
            if (r->frame >= warmup) {
                kept.push_back(r);
            }
        }
        if (kept.empty()) {
            kept = rows;
        }
        std::vector<double> enc, encrypt, tag, sec, total, payload, rate;
        for (const MetricsRecord* r : kept) {
            enc.push_back(r->t_encode_us);
            encrypt.push_back(r->t_encrypt_us);
            tag.push_back(r->t_tag_us);
            sec.push_back(r->t_encrypt_us + r->t_tag_us);
            total.push_back(r->t_total_us);
            payload.push_back(static_cast<double>(r->payload_bytes));
            if (r->t_total_us > 0) {
                rate.push_back(1e6 / r->t_total_us);
            }
        }
        CellSummary c;
        c.key = key;
        c.encode = describe(enc);
        c.encrypt = describe(encrypt);
        c.tag = describe(tag);
        c.security = describe(sec);
        c.total = describe(total);
        c.payload = describe(payload);
        // Without receiver samples, fall back to the rate the sender pipeline
        // alone could sustain.
        std::vector<double> fps_values;
        if (const auto it = fps.find(key); it != fps.end()) {
            for (const FpsSample& s : it->second) {
                fps_values.push_back(s.fps);
            }
        } else {
            fps_values = rate;
        }
        if (!fps_values.empty()) {
            c.fps = describe(fps_values);
        }
        summary.cells.push_back(std::move(c));
    }

    std::stable_sort(summary.cells.begin(), summary.cells.end(), [](const CellSummary& a, const CellSummary& b) {
        const auto aa = resolution_area(a.key.resolution);
        const auto ab = resolution_area(b.key.resolution);
        return std::tie(aa, a.key.resolution, a.key.codec, b.key.secured) <
               std::tie(ab, b.key.resolution, b.key.codec, a.key.secured);
    });

    for (const CellSummary& s : summary.cells) {
        if (!s.key.secured || !s.fps) {
            continue;
        }
        for (const CellSummary& u : summary.cells) {
            if (u.key.secured || !u.fps || u.key.resolution != s.key.resolution || u.key.codec != s.key.codec) {
                continue;
            }
            FpsDelta d;
            d.resolution = s.key.resolution;
            d.codec = s.key.codec;
            d.secured_fps = s.fps->mean;
            d.unsecured_fps = u.fps->mean;
            d.delta = d.secured_fps - d.unsecured_fps;
            d.stderr_ = std::sqrt(variance(*s.fps) / static_cast<double>(s.fps->n) +
                                  variance(*u.fps) / static_cast<double>(u.fps->n));
            d.ci95 = 1.96 * d.stderr_;
            summary.deltas.push_back(d);
        }
    }
    return summary;
}

// Running

CellRun run_cell(const BenchConfig& config, Motion motion, Resolution res, Codec codec, bool secured,
                 std::size_t frames)
{
    std::mt19937_64 rng(config.seed);
    MasterSecret master;
    for (auto& b : master.master_key) {
        b = static_cast<std::uint8_t>(rng());
    }
    for (auto& b : master.master_salt) {
        b = static_cast<std::uint8_t>(rng());
    }
    const SessionKeys keys = derive_session_keys(master, SessionId { static_cast<std::uint32_t>(rng()) | 1u });

    const double fps = config.pace_fps > 0 ? config.pace_fps : 30.0;
    SyntheticSource source(res, config.seed, motion, frames, fps);
    PacketSender sender(keys, config.iv_mode, static_cast<std::uint32_t>(config.seed) ^ 0x5eed5eedu, secured);

    std::unique_ptr<DatagramChannel> channel;
    if (config.channel == BenchChannel::Netsim) {
        FaultModel fm = config.fault;
        fm.seed = config.seed;
        channel = std::make_unique<SimulatedChannel>(fm);
    } else {
        channel = std::make_unique<LoopbackChannel>(4096);
    }

    ReceiverOptions ro;
    ro.codec = codec;
    ro.base64 = config.base64;
    ro.resolution = res;
    ro.mode = config.iv_mode;
    ro.secured = secured;
    StreamReceiver receiver(keys, ro);

    CellRun run;
    std::thread rx([&] {
        run_receiver(*channel, receiver,
                     [&](const ReceivedFrame& f) {
                         run.arrivals_s.push_back(std::chrono::duration<double>(f.arrival).count());
                     },
                     std::chrono::minutes(5));
    });

    StreamOptions so;
    so.codec = codec;
    so.quality = config.quality;
    so.base64 = config.base64;
    if (config.pace_fps > 0) {
        so.pacing = PacingPolicy { config.pace_fps, 0 };
    }
    StreamStats stats;
    try {
        stats = stream_frames(source, sender, *channel, so);
    } catch (...) {
        channel->close();
        rx.join();
        throw;
    }
    channel->close();
    rx.join();

    const std::string res_name = res.name();
    for (const FrameTiming& t : stats.frames) {
        MetricsRecord r;
        r.frame = t.frame;
        r.resolution = res_name;
        r.codec = codec;
        r.secured = secured;
        r.t_encode_us = micros(t.encode);
        r.t_encrypt_us = micros(t.encrypt);
        r.t_tag_us = micros(t.tag);
        r.t_total_us = micros(t.total);
        r.payload_bytes = t.payload_bytes;
        run.records.push_back(std::move(r));
    }
    const ReceiverStats rs = receiver.stats();
    run.auth_failures = rs.auth_failures;
    run.frames_received = rs.frames_ok;
    return run;
}

ExperimentResult run_experiment(const BenchConfig& config)
{
    ExperimentResult result;
    std::vector<bool> modes;
    if (config.secured != SecuredMode::Off) {
        modes.push_back(true);
    }
    if (config.secured != SecuredMode::On) {
        modes.push_back(false);
    }
    for (const Resolution res : config.resolutions) {
        for (const Codec codec : config.codecs) {
            for (const bool secured : modes) {
                CellRun run = run_cell(config, config.source, res, codec, secured, config.frames);
                result.fps[{ res.name(), codec, secured }] = fps_samples(skip_warmup(run.arrivals_s, config.warmup));
                result.auth_failures += run.auth_failures;
                result.frames_received += run.frames_received;
                result.records.insert(result.records.end(), run.records.begin(), run.records.end());
            }
        }
    }
    result.summary = aggregate(result.records, result.fps, config.warmup);

    if (config.trace_frames > 0) {
        for (const Motion motion : { Motion::StaticTraffic, Motion::Handheld }) {
            CellRun run = run_cell(config, motion, config.trace_resolution, config.trace_codec,
                                   config.secured != SecuredMode::Off, config.trace_frames);
            result.traces[motion] = fps_samples(skip_warmup(run.arrivals_s, config.warmup));
            SourceProfile p;
            p.motion = motion;
            p.resolution = config.trace_resolution.name();
            p.mean_delta = mean_frame_delta(config.trace_resolution, config.seed, motion,
                                            std::min<std::size_t>(config.trace_frames, 100));
            std::vector<double> payload;
            for (const MetricsRecord& r : run.records) {
                payload.push_back(static_cast<double>(r.payload_bytes));
            }
            p.payload = describe(payload);
            std::vector<double> fps;
            for (const FpsSample& s : result.traces[motion]) {
                fps.push_back(s.fps);
            }
            if (!fps.empty()) {
                p.fps = describe(fps);
            }
            result.sources.push_back(p);
        }
    }
    return result;
}

// Output

std::string format_summary(const Summary& summary)
{
    std::ostringstream out;
    char line[256];
    std::snprintf(line, sizeof(line), "%-10s %-5s %-7s %5s %12s %12s %12s %12s %12s %9s %9s\n", "resolution",
                  "codec", "secured", "n", "encode_us", "encrypt_us", "tag_us", "security_us", "total_us", "fps",
                  "fps_sd");
    out << line;
    for (const CellSummary& c : summary.cells) {
        std::snprintf(line, sizeof(line), "%-10s %-5s %-7s %5zu %12.3f %12.3f %12.3f %12.3f %12.3f %9.3f %9.3f\n",
                      c.key.resolution.c_str(), to_string(c.key.codec), c.key.secured ? "on" : "off", c.total.n,
                      c.encode.mean, c.encrypt.mean, c.tag.mean, c.security.mean, c.total.mean,
                      c.fps ? c.fps->mean : 0.0, c.fps ? c.fps->stddev : 0.0);
        out << line;
    }
    for (const FpsDelta& d : summary.deltas) {
        std::snprintf(line, sizeof(line), "delta %s %s: secured %.3f - unsecured %.3f = %.3f fps (stderr %.3f, ci95 %.3f)\n",
                      d.resolution.c_str(), to_string(d.codec), d.secured_fps, d.unsecured_fps, d.delta, d.stderr_,
                      d.ci95);
        out << line;
    }
    return out.str();
}

std::vector<std::filesystem::path> emit_plot_data(const ExperimentResult& result, const std::filesystem::path& dir)
{
    std::filesystem::create_directories(dir);
    std::vector<std::filesystem::path> written;
    auto open = [&](const char* name) {
        written.push_back(dir / name);
        std::ofstream f(written.back(), std::ios::binary | std::ios::trunc);
        if (!f) {
            throw std::runtime_error("cannot write " + written.back().string());
        }
        return f;
    };

    {
        auto f = open("fig1_2_time.tsv");
        f << "resolution\tcodec\tsecured\tt_encode_us\tt_encrypt_us\tt_tag_us\tt_security_us\tt_total_us\n";
        const auto& cells = result.summary.cells;
        for (const CellSummary& c : cells) {
            // One row per resolution and codec; the secured cell when there is one.
            const bool has_secured = std::any_of(cells.begin(), cells.end(), [&](const CellSummary& o) {
                return o.key.secured && o.key.resolution == c.key.resolution && o.key.codec == c.key.codec;
            });
            if (c.key.secured != has_secured) {
                continue;
            }
            f << c.key.resolution << '\t' << to_string(c.key.codec) << '\t' << (c.key.secured ? 1 : 0) << '\t'
              << fmt3(c.encode.mean) << '\t' << fmt3(c.encrypt.mean) << '\t' << fmt3(c.tag.mean) << '\t'
              << fmt3(c.security.mean) << '\t' << fmt3(c.total.mean) << '\n';
        }
    }
    {
        auto f = open("fig3_4_fps.tsv");
        f << "resolution\tcodec\tfps_secured\tfps_unsecured\tdelta\tstderr\tci95\n";
        for (const FpsDelta& d : result.summary.deltas) {
            f << d.resolution << '\t' << to_string(d.codec) << '\t' << fmt3(d.secured_fps) << '\t'
              << fmt3(d.unsecured_fps) << '\t' << fmt3(d.delta) << '\t' << fmt3(d.stderr_) << '\t' << fmt3(d.ci95)
              << '\n';
        }
    }
    {
        auto f = open("fig5_sources.tsv");
        f << "source\tresolution\tmean_frame_delta\tpayload_mean\tpayload_stddev\tfps_mean\tfps_stddev\n";
        for (const SourceProfile& p : result.sources) {
            f << to_string(p.motion) << '\t' << p.resolution << '\t' << fmt3(p.mean_delta) << '\t'
              << fmt3(p.payload.mean) << '\t' << fmt3(p.payload.stddev) << '\t' << fmt3(p.fps.mean) << '\t'
              << fmt3(p.fps.stddev) << '\n';
        }
    }
    for (const auto& [motion, name] : { std::pair { Motion::StaticTraffic, "fig6_fps_trace_static.tsv" },
                                        std::pair { Motion::Handheld, "fig7_fps_trace_handheld.tsv" } }) {
        auto f = open(name);
        f << "time_s\tframes_in_window\tfps\n";
        if (const auto it = result.traces.find(motion); it != result.traces.end()) {
            for (const FpsSample& s : it->second) {
                f << fmt3(s.window_start_s + s.window_s) << '\t' << s.frames_in_window << '\t' << fmt3(s.fps) << '\n';
            }
        }
    }
    return written;
}

void write_outputs(const ExperimentResult& result, const std::filesystem::path& dir)
{
    std::filesystem::create_directories(dir);
    {
        std::ofstream csv(dir / "results.csv", std::ios::binary | std::ios::trunc);
        write_csv(csv, result.records);
    }
    {
        std::ofstream txt(dir / "summary.txt", std::ios::binary | std::ios::trunc);
        txt << format_summary(result.summary);
    }
    emit_plot_data(result, dir);
}

} // namespace vsrtp
