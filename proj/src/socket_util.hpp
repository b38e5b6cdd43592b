#ifndef VSRTP_SRC_SOCKET_UTIL_HPP
#define VSRTP_SRC_SOCKET_UTIL_HPP

#include <netinet/in.h>

#include <chrono>
#include <cstdint>
#include <string>

namespace vsrtp::detail {

/// IPv4 address for host (dotted quad or resolvable name). Throws
/// std::runtime_error if it cannot be resolved.
sockaddr_in resolve_ipv4(const std::string& host, std::uint16_t port);

std::string format_address(const sockaddr_in& addr);

/// poll() for readability; false on timeout.
bool wait_readable(int fd, std::chrono::milliseconds timeout);

[[noreturn]] void throw_errno(const std::string& what);

} // namespace vsrtp::detail

#endif
