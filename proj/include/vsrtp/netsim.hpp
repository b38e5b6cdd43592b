#ifndef VSRTP_NETSIM_HPP
#define VSRTP_NETSIM_HPP

#include "vsrtp/bytes.hpp"

#include <cstdint>
#include <vector>

// Deterministic lossy channel model.

namespace vsrtp {

struct FaultModel {
    std::uint64_t seed = 0;
    double loss_prob = 0;
    double dup_prob = 0;
    double corrupt_prob = 0;
    /// A datagram may be overtaken only by datagrams sent fewer than this
    /// many slots after it. 0 and 1 keep send order.
    std::size_t reorder_window = 0;
    double delay_min_ms = 0;
    double delay_max_ms = 0;
    /// Spacing of the input trace; datagram i is sent at i * send_interval_ms.
    double send_interval_ms = 0;

    /// Throws std::invalid_argument for probabilities outside [0,1] or a bad
    /// delay range.
    void validate() const;
};

struct Delivery {
    Bytes data;
    double deliver_time_ms = 0;
    std::size_t original_index = 0;
    bool duplicate = false;
    bool corrupted = false;
};

/// Deliveries sorted by delivery time. Same (trace, model), same schedule.
std::vector<Delivery> simulate(const std::vector<Bytes>& trace, const FaultModel& model);

} // namespace vsrtp

#endif // VSRTP_NETSIM_HPP
