#ifndef VSRTP_TOOLS_CLI_HPP
#define VSRTP_TOOLS_CLI_HPP

#include <CLI11.hpp>

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <string>

namespace vsrtp::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitRuntime = 2;

struct CliConfig {
    std::string uri = "stream/1";
    std::string host = "127.0.0.1";
    std::uint16_t control_port = 8554;
    std::uint16_t rtp_port = 0;
    std::string key_file;
    std::string codec = "jpeg";
    int quality = 90;
    bool no_base64 = false;
    std::string iv_mode = "unique-per-packet";
    bool allow_insecure_iv = false;

    // stream
    std::string source = "synthetic:720p";
    std::size_t frames = 300;
    double fps = 30;
    std::uint64_t seed = 1;
    int accept_timeout_s = 30;

    // receive
    std::string resolution = "720p";
    std::size_t expect_frames = 0;
    int idle_ms = 2000;
    bool quiet = false;

    // bench
    std::string config_path;
    std::string output_dir;
};

/// Builds the parser with the stream, receive and bench subcommands bound to
/// `config`.
std::unique_ptr<CLI::App> make_app(CliConfig& config);

/// Parses argv and runs the selected subcommand. Diagnostics go to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace vsrtp::cli

#endif // VSRTP_TOOLS_CLI_HPP
