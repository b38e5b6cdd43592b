#ifndef VSRTP_TESTS_LOG_CAPTURE_HPP
#define VSRTP_TESTS_LOG_CAPTURE_HPP

#include <spdlog/sinks/ostream_sink.h>
#include <spdlog/spdlog.h>

#include <memory>
#include <sstream>
#include <string>

// Redirects the default spdlog logger into a string for the lifetime of the
// object.
class LogCapture {
public:
    LogCapture()
        : previous_(spdlog::default_logger())
    {
        auto sink = std::make_shared<spdlog::sinks::ostream_sink_mt>(stream_);
        auto logger = std::make_shared<spdlog::logger>("capture", sink);
        logger->set_level(spdlog::level::trace);
        spdlog::set_default_logger(logger);
    }

    ~LogCapture() { spdlog::set_default_logger(previous_); }

    std::string text() const { return stream_.str(); }

private:
    std::shared_ptr<spdlog::logger> previous_;
    std::ostringstream stream_;
};

#endif
