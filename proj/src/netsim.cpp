#include "vsrtp/netsim.hpp"

#include <algorithm>
#include <random>
#include <stdexcept>

namespace vsrtp {

void FaultModel::validate() const
{
    for (const double p : { loss_prob, dup_prob, corrupt_prob }) {
        if (!(p >= 0.0 && p <= 1.0)) {
            throw std::invalid_argument("fault probabilities must be in [0, 1]");
        }
    }
    if (!(delay_min_ms >= 0.0) || !(delay_max_ms >= delay_min_ms) || !(send_interval_ms >= 0.0)) {
        throw std::invalid_argument("delays must satisfy 0 <= min <= max");
    }
}

std::vector<Delivery> simulate(const std::vector<Bytes>& trace, const FaultModel& model)
{
    model.validate();
    std::mt19937_64 rng(model.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_real_distribution<double> delay(model.delay_min_ms, model.delay_max_ms);

    struct Slot {
        Delivery d;
        double order;
    };
    std::vector<Slot> slots;
    slots.reserve(trace.size());

    for (std::size_t i = 0; i < trace.size(); ++i) {
        // Every datagram consumes the same draws whether or not it survives,
        // so changing one probability does not reshuffle unrelated decisions.
        const bool lost = unit(rng) < model.loss_prob;
        const bool dup = unit(rng) < model.dup_prob;
        for (int copy = 0; copy < (dup ? 2 : 1); ++copy) {
            const bool corrupt = unit(rng) < model.corrupt_prob;
            const std::uint64_t bit = rng();
            const double latency = model.delay_max_ms > model.delay_min_ms ? delay(rng) : model.delay_min_ms;
            const double jitter = unit(rng) * static_cast<double>(model.reorder_window);
            if (lost) {
                continue;
            }
            Delivery d;
            d.data = trace[i];
            d.original_index = i;
            d.duplicate = copy == 1;
            if (corrupt && !d.data.empty()) {
                const std::uint64_t pos = bit % (d.data.size() * 8);
                d.data[pos / 8] ^= static_cast<std::uint8_t>(1u << (pos % 8));
                d.corrupted = true;
            }
            d.deliver_time_ms = static_cast<double>(i) * model.send_interval_ms + latency;
            slots.push_back({ std::move(d), static_cast<double>(i) + jitter + (copy == 1 ? 0.5 : 0.0) });
        }
    }

    std::stable_sort(slots.begin(), slots.end(), [](const Slot& a, const Slot& b) {
        if (a.d.deliver_time_ms != b.d.deliver_time_ms) {
            return a.d.deliver_time_ms < b.d.deliver_time_ms;
        }
        return a.order < b.order;
    });
    std::vector<Delivery> out;
    out.reserve(slots.size());
    for (auto& s : slots) {
        out.push_back(std::move(s.d));
    }
    return out;
}

} // namespace vsrtp
