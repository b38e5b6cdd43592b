#ifndef VSRTP_BENCH_HPP
#define VSRTP_BENCH_HPP

#include "vsrtp/media.hpp"
#include "vsrtp/netsim.hpp"
#include "vsrtp/crypto.hpp"

#include <chrono>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

namespace vsrtp {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class EmptyInput : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline constexpr std::size_t kDefaultWarmup = 30;

enum class SecuredMode { On, Off, Both };
enum class BenchChannel { Loopback, Netsim };

/// Flat `key = value` file; `#` starts a comment. Unknown keys are errors.
struct BenchConfig {
    Motion source = Motion::StaticTraffic;
    std::vector<Resolution> resolutions { k480p, k720p, k1080p };
    std::vector<Codec> codecs { Codec::Raw, Codec::Jpeg };
    SecuredMode secured = SecuredMode::Both;
    std::size_t frames = 300;
    std::uint64_t seed = 1;
    int quality = kDefaultJpegQuality;
    bool base64 = true;
    /// 0 streams unpaced.
    double pace_fps = 0;
    std::size_t warmup = kDefaultWarmup;
    IvMode iv_mode = IvMode::UniquePerPacket;
    BenchChannel channel = BenchChannel::Loopback;
    FaultModel fault;
    /// Frames per FPS trace run (one per source kind); 0 skips them.
    std::size_t trace_frames = 300;
    Resolution trace_resolution = k720p;
    Codec trace_codec = Codec::Jpeg;
    std::filesystem::path output_dir = "bench_out";
};

BenchConfig parse_config(std::string_view text);
BenchConfig load_config(const std::filesystem::path& path);

const char* to_string(SecuredMode m);

/// One CSV row.
struct MetricsRecord {
    std::size_t frame = 0;
    std::string resolution;
    Codec codec = Codec::Raw;
    bool secured = true;
    double t_encode_us = 0;
    double t_encrypt_us = 0;
    double t_tag_us = 0;
    double t_total_us = 0;
    std::size_t payload_bytes = 0;

    friend bool operator==(const MetricsRecord&, const MetricsRecord&) = default;
};

inline constexpr std::string_view kCsvHeader =
    "frame,resolution,codec,secured,t_encode_us,t_encrypt_us,t_tag_us,t_total_us,payload_bytes";

void write_csv(std::ostream& out, const std::vector<MetricsRecord>& records);
/// Throws ConfigError on a wrong header or malformed row.
std::vector<MetricsRecord> read_csv(std::istream& in);

struct FpsSample {
    double window_start_s = 0;
    double window_s = 1.0;
    std::size_t frames_in_window = 0;
    double fps = 0;
};

/// One sample per arrival whose trailing window lies inside the run. A run
/// shorter than the window yields one sample over its whole span.
std::vector<FpsSample> fps_samples(const std::vector<double>& arrivals_s, double window_s = 1.0);

struct Stats {
    std::size_t n = 0;
    double mean = 0;
    double median = 0;
    double p95 = 0;
    double stddev = 0;
};

/// Linear-interpolated percentiles. Throws EmptyInput on no values.
Stats describe(std::vector<double> values);

struct CellKey {
    std::string resolution;
    Codec codec = Codec::Raw;
    bool secured = true;

    auto tie() const { return std::tie(resolution, codec, secured); }
    friend bool operator<(const CellKey& a, const CellKey& b) { return a.tie() < b.tie(); }
    friend bool operator==(const CellKey& a, const CellKey& b) { return a.tie() == b.tie(); }
};

struct CellSummary {
    CellKey key;
    Stats encode;
    Stats encrypt;
    Stats tag;
    /// encrypt + tag per frame.
    Stats security;
    Stats total;
    Stats payload;
    std::optional<Stats> fps;
};

struct FpsDelta {
    std::string resolution;
    Codec codec = Codec::Raw;
    double secured_fps = 0;
    double unsecured_fps = 0;
    double delta = 0;
    double stderr_ = 0;
    double ci95 = 0;
};

struct Summary {
    std::vector<CellSummary> cells;
    std::vector<FpsDelta> deltas;
};

/// Cells ordered by resolution size, then codec, then secured. Frames below
/// `warmup` are excluded unless a cell has no others. Throws EmptyInput.
Summary aggregate(const std::vector<MetricsRecord>& records,
                  const std::map<CellKey, std::vector<FpsSample>>& fps = {}, std::size_t warmup = kDefaultWarmup);

struct SourceProfile {
    Motion motion = Motion::StaticTraffic;
    std::string resolution;
    double mean_delta = 0;
    Stats payload;
    Stats fps;
};

struct ExperimentResult {
    std::vector<MetricsRecord> records;
    std::map<CellKey, std::vector<FpsSample>> fps;
    std::map<Motion, std::vector<FpsSample>> traces;
    std::vector<SourceProfile> sources;
    Summary summary;
    std::uint64_t auth_failures = 0;
    std::uint64_t frames_received = 0;
};

/// Grid of resolutions x codecs x secured, then one trace run per source
/// kind. Sender and receiver run in-process on separate threads.
ExperimentResult run_experiment(const BenchConfig& config);

struct CellRun {
    std::vector<MetricsRecord> records;
    std::vector<double> arrivals_s;
    std::uint64_t auth_failures = 0;
    std::uint64_t frames_received = 0;
};

/// A single sender/receiver run.
CellRun run_cell(const BenchConfig& config, Motion motion, Resolution res, Codec codec, bool secured,
                 std::size_t frames);

std::string format_summary(const Summary& summary);

/// Writes fig1_2_time.tsv, fig3_4_fps.tsv, fig5_sources.tsv,
/// fig6_fps_trace_static.tsv and fig7_fps_trace_handheld.tsv.
std::vector<std::filesystem::path> emit_plot_data(const ExperimentResult& result, const std::filesystem::path& dir);

/// results.csv, summary.txt and the figure files.
void write_outputs(const ExperimentResult& result, const std::filesystem::path& dir);

} // namespace vsrtp

#endif // VSRTP_BENCH_HPP
