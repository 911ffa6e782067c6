#include <gtest/gtest.h>

#include <set>

#include "mtcagg/error.hpp"
#include "mtcagg/scenario.hpp"

using namespace mtcagg;

namespace {

const char* kMinimal = R"({"num_mtds": 10, "num_aggregators": 2, "bundle_limit": 3, "packet_rate_per_s": 0.5})";

}

TEST(Scenario, DefaultsMatchReferenceTable) {
    const ScenarioConfig c;
    EXPECT_EQ(c.prach.num_preambles, 54u);
    EXPECT_EQ(c.prach.backoff_subframes, 20u);
    EXPECT_EQ(c.prach.max_ra_attempts_per_payload, 10u);
    EXPECT_EQ(c.prach.rao_period_subframes, 10u);
    EXPECT_EQ(c.prach.rbs_per_rao, 6u);
    EXPECT_EQ(c.harq.max_data_retransmissions, 1u);
    EXPECT_EQ(c.sim_length_s, 60.0);
    EXPECT_EQ(c.timing.processing_time_ms, 3u);
    EXPECT_EQ(c.timing.fragmentation_threshold_rbs, 6u);
    EXPECT_EQ(c.packet_size_bytes, 100u);
    EXPECT_EQ(c.cell_radius_m, 1000.0);
    EXPECT_EQ(c.rrc.idle_timeout_ms, 100u);
    EXPECT_EQ(c.rrc.post_msg4_signalling_msgs, 6u);
    EXPECT_EQ(c.phy.dl_tx_power_dbm, 30.0);
    EXPECT_EQ(c.phy.ul_tx_power_dbm, 23.0);
    EXPECT_EQ(c.phy.tbs_bits_per_rb, 296u);
    EXPECT_EQ(c.phy.cces_per_subframe, 6u);
    EXPECT_EQ(c.phy.earfcn_dl, 5900u);
    EXPECT_EQ(c.horizon_subframes(), 60000);
}

TEST(Scenario, EmptyDocumentNamesRequiredFields) {
    try {
        load_config("{}");
        FAIL() << "expected ConfigError";
    } catch (const ConfigError& e) {
        EXPECT_EQ(e.field(), "num_mtds");
        const std::string what = e.what();
        for (const char* f : {"num_mtds", "num_aggregators", "bundle_limit", "packet_rate_per_s"})
            EXPECT_NE(what.find(f), std::string::npos) << f;
    }
}

TEST(Scenario, MinimalDocumentTakesDefaults) {
    const auto c = load_config(kMinimal);
    ScenarioConfig expected;
    expected.num_mtds = 10;
    expected.num_aggregators = 2;
    expected.bundle_limit = 3;
    expected.packet_rate_per_s = 0.5;
    EXPECT_EQ(c, expected);
}

TEST(Scenario, BundleLimitZeroRejected) {
    try {
        load_config(R"({"num_mtds": 1, "num_aggregators": 0, "bundle_limit": 0, "packet_rate_per_s": 1})");
        FAIL() << "expected ConfigError";
    } catch (const ConfigError& e) {
        EXPECT_EQ(e.field(), "bundle_limit");
    }
}

TEST(Scenario, InvalidFieldsNamed) {
    struct Case {
        const char* patch;
        const char* field;
    };
    const Case cases[] = {
        {R"("cell_radius_m": 0)", "cell_radius_m"},
        {R"("sim_length_s": -1)", "sim_length_s"},
        {R"("timing": {"fragmentation_threshold_rbs": 7})", "timing.fragmentation_threshold_rbs"},
        {R"("phy": {"pathloss_model": "free_space"})", "phy.pathloss_model"},
        {R"("phy": {"ul_rbs_per_subframe": 111})", "phy.ul_rbs_per_subframe"},
        {R"("engine": {"num_repetitions": 0})", "engine.num_repetitions"},
    };
    for (const auto& c : cases) {
        const std::string doc = std::string(R"({"num_mtds": 1, "num_aggregators": 0, "bundle_limit": 1, "packet_rate_per_s": 1, )") +
                                c.patch + "}";
        try {
            load_config(doc);
            ADD_FAILURE() << "accepted " << c.patch;
        } catch (const ConfigError& e) {
            EXPECT_EQ(e.field(), c.field) << c.patch;
        }
    }
}

TEST(Scenario, UnknownAndMalformedInputRejected) {
    EXPECT_THROW(load_config(R"({"num_mtds": 1, "num_aggregators": 0, "bundle_limit": 1, "packet_rate_per_s": 1, "nmu_mtds": 3})"),
                 ConfigError);
    EXPECT_THROW(load_config(R"({"num_mtds": 1, "num_aggregators": 0, "bundle_limit": 1, "packet_rate_per_s": 1, "prach": {"preambles": 3}})"),
                 ConfigError);
    EXPECT_THROW(load_config("{not json"), ConfigError);
    EXPECT_THROW(load_config("[1, 2]"), ConfigError);
    EXPECT_THROW(load_config(R"({"num_mtds": -1, "num_aggregators": 0, "bundle_limit": 1, "packet_rate_per_s": 1})"),
                 ConfigError);
    EXPECT_THROW(load_config(R"({"num_mtds": "many", "num_aggregators": 0, "bundle_limit": 1, "packet_rate_per_s": 1})"),
                 ConfigError);
    EXPECT_THROW(load_config(R"({"num_mtds": 1, "num_aggregators": 0, "bundle_limit": 1, "packet_rate_per_s": 1, "packet_rate_per_min": 60})"),
                 ConfigError);
}

TEST(Scenario, PerMinuteRate) {
    const auto c = load_config(R"({"num_mtds": 1, "num_aggregators": 0, "bundle_limit": 1, "packet_rate_per_min": 3})");
    EXPECT_DOUBLE_EQ(c.packet_rate_per_s, 0.05);
}

TEST(Scenario, SerializationRoundTrips) {
    ScenarioConfig c = load_config(kMinimal);
    const std::string doc = serialize_config(c);
    EXPECT_EQ(load_config(doc), c);
    EXPECT_EQ(serialize_config(load_config(doc)), doc);

    c.prach.num_preambles = 17;
    c.phy.snr_threshold_db = -3.25;
    c.phy.channel_errors = false;
    c.rrc.charge_signalling_resources = false;
    c.engine.master_seed = 0xFFFFFFFFFFFFFFFFULL;
    c.packet_rate_per_s = 1.0 / 60.0;
    EXPECT_EQ(load_config(serialize_config(c)), c);
}

TEST(Scenario, Overrides) {
    ScenarioConfig c = load_config(kMinimal);
    apply_override(c, "prach.num_preambles", "20");
    apply_override(c, "phy.channel_errors", "false");
    apply_override(c, "packet_rate_per_min", "3");
    apply_override(c, "phy.pathloss_model", "macro_log_distance");
    EXPECT_EQ(c.prach.num_preambles, 20u);
    EXPECT_FALSE(c.phy.channel_errors);
    EXPECT_DOUBLE_EQ(c.packet_rate_per_s, 0.05);
    EXPECT_THROW(apply_override(c, "prach.bogus", "1"), ConfigError);
    EXPECT_THROW(apply_override(c, "num_mtds", "abc"), ConfigError);
}

TEST(Scenario, RunSeedsDeterministicAndInjective) {
    EXPECT_EQ(derive_run_seed(5, 3), derive_run_seed(5, 3));
    EXPECT_NE(derive_run_seed(5, 0), derive_run_seed(5, 1));

    std::set<std::uint64_t> per_master;
    for (std::uint64_t k = 0; k < 10000; ++k) per_master.insert(derive_run_seed(42, k));
    EXPECT_EQ(per_master.size(), 10000u);

    // Brute-force collision scan over 10^4 (master, master') pairs.
    std::size_t collisions = 0;
    for (std::uint64_t s = 0; s < 100; ++s)
        for (std::uint64_t t = 0; t < 100; ++t)
            if (s != t && derive_run_seed(s, 7) == derive_run_seed(t, 7)) ++collisions;
    EXPECT_EQ(collisions, 0u);
}
