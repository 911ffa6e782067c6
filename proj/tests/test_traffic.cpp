#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "harness.hpp"
#include "mtcagg/spatial.hpp"
#include "mtcagg/traffic.hpp"

using namespace mtcagg;
using mtcagg::testing::make_config;

namespace {

ArrivalPlan arrivals(const ScenarioConfig& c, std::uint64_t seed) {
    Rng rng(seed);
    const auto topo = deploy(c, rng);
    return generate_arrivals(c, topo, rng);
}

}  // namespace

TEST(Traffic, ZeroRateGeneratesNothing) {
    EXPECT_TRUE(arrivals(make_config(100, 3, 0, 1), 1).packets.empty());
}

TEST(Traffic, TotalCountPoisson) {
    const auto plan = arrivals(make_config(5000, 0, 1, 1), 21);
    EXPECT_LE(std::abs(static_cast<double>(plan.packets.size()) - 5000.0), 3 * std::sqrt(5000.0));
}

TEST(Traffic, SortedWithSequentialIds) {
    const auto plan = arrivals(make_config(500, 7, 6, 1), 2);
    for (std::size_t i = 0; i < plan.packets.size(); ++i) {
        EXPECT_EQ(plan.packets[i].id, i);
        EXPECT_EQ(plan.packets[i].size_bytes, 100u);
        EXPECT_GE(plan.packets[i].arrival_time_ms, 0.0);
        EXPECT_LT(plan.packets[i].arrival_time_ms, 60000.0);
        if (i) {
            EXPECT_LE(plan.packets[i - 1].arrival_time_ms, plan.packets[i].arrival_time_ms);
        }
    }
    std::size_t total = 0;
    for (std::uint32_t ue = 0; ue < plan.per_ue.size(); ++ue) {
        for (auto id : plan.per_ue[ue]) EXPECT_EQ(plan.packets[id].ue, ue);
        total += plan.per_ue[ue].size();
    }
    EXPECT_EQ(total, plan.packets.size());
}

TEST(Traffic, PacketsFollowAssociation) {
    const auto c = make_config(300, 4, 6, 1);
    Rng rng(9);
    const auto topo = deploy(c, rng);
    const auto plan = generate_arrivals(c, topo, rng);
    for (const auto& p : plan.packets) EXPECT_EQ(p.ue, topo.association[p.source_mtd]);

    const auto direct = arrivals(make_config(300, 0, 6, 1), 9);
    for (const auto& p : direct.packets) EXPECT_EQ(p.ue, p.source_mtd);
}

TEST(Traffic, InterarrivalsExponentialKs) {
    // One MTD at 1/60 per second; 10^4 samples need a long horizon.
    auto c = make_config(1, 0, 1, 1);
    c.sim_length_s = 60.0 * 10500;
    const auto plan = arrivals(c, 77);
    ASSERT_GE(plan.packets.size(), 10000u);
    std::vector<double> gaps;
    double prev = 0.0;
    for (std::size_t i = 0; i < 10000; ++i) {
        gaps.push_back(plan.packets[i].arrival_time_ms - prev);
        prev = plan.packets[i].arrival_time_ms;
    }
    std::sort(gaps.begin(), gaps.end());
    const double mean_ms = 60000.0;
    double d = 0.0;
    const double n = static_cast<double>(gaps.size());
    for (std::size_t i = 0; i < gaps.size(); ++i) {
        const double f = 1.0 - std::exp(-gaps[i] / mean_ms);
        d = std::max({d, std::abs(f - i / n), std::abs((i + 1) / n - f)});
    }
    EXPECT_LT(d, 1.628 / std::sqrt(n));  // 1% critical value
}

TEST(Traffic, CompoundStreamDispersionNearOne) {
    // Counts per 1 s window at one aggregator: variance/mean ~ 1 for Poisson.
    const auto c = make_config(2000, 1, 30, 1);
    const auto plan = arrivals(c, 5);
    std::vector<int> counts(60, 0);
    for (const auto& p : plan.packets) ++counts[static_cast<std::size_t>(p.arrival_time_ms / 1000.0)];
    double mean = 0.0, var = 0.0;
    for (int k : counts) mean += k;
    mean /= counts.size();
    for (int k : counts) var += (k - mean) * (k - mean);
    var /= counts.size() - 1;
    // Sampling sd of the dispersion index with 60 windows is about sqrt(2/59).
    EXPECT_NEAR(var / mean, 1.0, 3 * std::sqrt(2.0 / 59));
}

TEST(Traffic, DoublingHorizonDoublesCount) {
    auto c = make_config(3000, 0, 1, 1);
    const double n1 = arrivals(c, 3).packets.size();
    c.sim_length_s = 120;
    const double n2 = arrivals(c, 3).packets.size();
    EXPECT_LE(std::abs(n2 - 2 * n1), 3 * std::sqrt(2 * n1) + 3 * std::sqrt(n1) * 2);
}

TEST(Traffic, Quantization) {
    EXPECT_EQ(quantize_to_subframe(0.0), 0);
    EXPECT_EQ(quantize_to_subframe(6.2), 7);
    EXPECT_EQ(quantize_to_subframe(7.0), 7);
}

TEST(Traffic, DropReasonNames) {
    EXPECT_EQ(to_string(DropReason::ra_attempts_exhausted), "ra_attempts_exhausted");
    EXPECT_EQ(to_string(DropReason::not_delivered_by_sim_end), "not_delivered_by_sim_end");
}

TEST(Traffic, ArrivalsCsv) {
    const auto plan = arrivals(make_config(20, 2, 60, 1), 1);
    std::ostringstream os;
    write_arrivals_csv(os, plan, false);
    const auto text = os.str();
    EXPECT_EQ(text.substr(0, text.find('\n')), "packet_id,mtd,aggregator,t_arrival_ms");
    EXPECT_EQ(static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n')),
              plan.packets.size() + 1);
}
