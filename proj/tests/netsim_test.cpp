#include "vsrtp/netsim.hpp"
#include "vsrtp/srtp.hpp"

#include <gtest/gtest.h>

#include <bit>
#include <cmath>
#include <map>
#include <random>

using namespace vsrtp;

namespace {

std::vector<Bytes> numbered_trace(std::size_t n, std::size_t size = 16)
{
    std::vector<Bytes> trace(n, Bytes(size));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t b = 0; b < size; ++b) {
            trace[i][b] = static_cast<std::uint8_t>((i >> (8 * (b % 4))) + b);
        }
    }
    return trace;
}

int bit_distance(const Bytes& a, const Bytes& b)
{
    int d = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        d += std::popcount(static_cast<unsigned>(a[i] ^ b[i]));
    }
    return d;
}

bool same_schedule(const std::vector<Delivery>& a, const std::vector<Delivery>& b)
{
    if (a.size() != b.size()) {
        return false;
    }
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i].data != b[i].data || a[i].original_index != b[i].original_index ||
            a[i].deliver_time_ms != b[i].deliver_time_ms || a[i].duplicate != b[i].duplicate) {
            return false;
        }
    }
    return true;
}

} // namespace

TEST(Netsim, PerfectChannelIsIdentity)
{
    const auto trace = numbered_trace(500);
    const auto out = simulate(trace, FaultModel {});
    ASSERT_EQ(out.size(), trace.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        EXPECT_EQ(out[i].original_index, i);
        EXPECT_EQ(out[i].data, trace[i]);
        EXPECT_EQ(out[i].deliver_time_ms, 0.0);
        EXPECT_FALSE(out[i].corrupted);
        EXPECT_FALSE(out[i].duplicate);
    }
}

TEST(Netsim, TotalLossIsEmpty)
{
    FaultModel m;
    m.loss_prob = 1.0;
    m.dup_prob = 1.0;
    EXPECT_TRUE(simulate(numbered_trace(1000), m).empty());
}

TEST(Netsim, LossWithinBinomialBound)
{
    const std::size_t n = 10000;
    const double p = 0.95;
    const double sigma = std::sqrt(n * p * (1 - p));
    const auto trace = numbered_trace(n);
    for (const std::uint64_t seed : { 1ull, 2ull, 3ull, 99ull }) {
        FaultModel m;
        m.seed = seed;
        m.loss_prob = 0.05;
        const auto a = simulate(trace, m);
        EXPECT_LE(std::abs(static_cast<double>(a.size()) - n * p), 3 * sigma) << seed;
        EXPECT_TRUE(same_schedule(a, simulate(trace, m)));
    }
}

TEST(Netsim, DeterministicAndConserving)
{
    const auto trace = numbered_trace(3000, 64);
    FaultModel m;
    m.seed = 77;
    m.loss_prob = 0.1;
    m.dup_prob = 0.1;
    m.corrupt_prob = 0.1;
    m.reorder_window = 8;
    const auto a = simulate(trace, m);
    EXPECT_TRUE(same_schedule(a, simulate(trace, m)));
    m.seed = 78;
    EXPECT_FALSE(same_schedule(a, simulate(trace, m)));

    std::map<std::size_t, int> copies;
    std::size_t corrupted = 0;
    std::size_t duplicates = 0;
    for (const Delivery& d : a) {
        ASSERT_LT(d.original_index, trace.size());
        ++copies[d.original_index];
        if (d.corrupted) {
            ++corrupted;
            EXPECT_EQ(bit_distance(d.data, trace[d.original_index]), 1);
        } else {
            EXPECT_EQ(d.data, trace[d.original_index]);
        }
        duplicates += d.duplicate;
    }
    for (const auto& [i, c] : copies) {
        EXPECT_LE(c, 2);
    }
    EXPECT_GT(corrupted, 0u);
    EXPECT_GT(duplicates, 0u);
    EXPECT_LT(copies.size(), trace.size());
}

TEST(Netsim, ReorderStaysWithinWindow)
{
    const auto trace = numbered_trace(5000);
    for (const std::size_t w : { 0u, 1u, 2u, 8u, 32u }) {
        FaultModel m;
        m.seed = w;
        m.reorder_window = w;
        const auto out = simulate(trace, m);
        ASSERT_EQ(out.size(), trace.size());
        std::size_t inversions = 0;
        for (std::size_t i = 0; i < out.size(); ++i) {
            for (std::size_t j = i + 1; j < out.size() && j < i + 64; ++j) {
                if (out[j].original_index < out[i].original_index) {
                    ++inversions;
                    EXPECT_LT(out[i].original_index - out[j].original_index, std::max<std::size_t>(w, 1));
                }
            }
        }
        if (w <= 1) {
            EXPECT_EQ(inversions, 0u);
        } else {
            EXPECT_GT(inversions, 0u);
        }
    }
}

TEST(Netsim, DelaysInRangeAndSorted)
{
    const auto trace = numbered_trace(2000);
    FaultModel m;
    m.seed = 5;
    m.delay_min_ms = 2;
    m.delay_max_ms = 30;
    m.send_interval_ms = 1;
    const auto out = simulate(trace, m);
    for (std::size_t i = 0; i < out.size(); ++i) {
        const double sent = static_cast<double>(out[i].original_index) * m.send_interval_ms;
        EXPECT_GE(out[i].deliver_time_ms, sent + m.delay_min_ms);
        EXPECT_LE(out[i].deliver_time_ms, sent + m.delay_max_ms);
        if (i > 0) {
            EXPECT_LE(out[i - 1].deliver_time_ms, out[i].deliver_time_ms);
        }
    }
}

TEST(Netsim, RejectsInvalidModel)
{
    const auto trace = numbered_trace(1);
    for (const auto& m : { FaultModel { .loss_prob = -0.1 }, FaultModel { .dup_prob = 1.5 },
                           FaultModel { .corrupt_prob = NAN }, FaultModel { .delay_min_ms = 5, .delay_max_ms = 1 } }) {
        EXPECT_THROW(simulate(trace, m), std::invalid_argument);
    }
}

TEST(Netsim, CorruptedPacketsNeverUnprotect)
{
    MasterSecret master;
    master.master_key.fill(0x42);
    const SessionKeys keys = derive_session_keys(master, SessionId { 9 });
    PacketSender sender(keys, IvMode::UniquePerPacket, 0x1234);
    std::mt19937_64 rng(8);
    std::vector<Bytes> trace;
    for (std::uint32_t f = 0; f < 200; ++f) {
        Bytes frame(500 + rng() % 3000);
        for (auto& b : frame) {
            b = static_cast<std::uint8_t>(rng());
        }
        for (Bytes& p : sender.packetize(frame, f * 3000, 1200)) {
            trace.push_back(std::move(p));
        }
    }
    FaultModel m;
    m.seed = 4;
    m.corrupt_prob = 1.0;
    m.dup_prob = 0.2;
    m.reorder_window = 4;
    Unprotector receiver(keys, IvMode::UniquePerPacket);
    std::size_t passed = 0;
    for (const Delivery& d : simulate(trace, m)) {
        ASSERT_TRUE(d.corrupted);
        passed += receiver.unprotect(d.data).ok();
    }
    EXPECT_EQ(passed, 0u);
}
