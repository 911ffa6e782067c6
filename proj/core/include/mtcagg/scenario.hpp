#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace mtcagg {

struct PrachConfig {
    std::uint32_t num_preambles = 54;
    std::uint32_t rao_period_subframes = 10;
    /// PRACH width in a RAO subframe; at 1.4 MHz this is the whole carrier.
    std::uint32_t rbs_per_rao = 6;
    /// Backoff indicator window; a failed attempt waits uniform [0, window].
    std::uint32_t backoff_subframes = 20;
    /// New random-access procedures allowed per payload (K).
    std::uint32_t max_ra_attempts_per_payload = 10;
    /// Preamble transmissions allowed inside one random-access procedure.
    std::uint32_t preamble_trans_max = 10;
    /// RA-phase messages expire this many subframes after becoming ready.
    std::uint32_t message_deadline_subframes = 10;

    bool operator==(const PrachConfig&) const = default;
};

struct RrcConfig {
    std::uint32_t idle_timeout_ms = 100;
    std::uint32_t post_msg4_signalling_msgs = 6;
    /// When false the post-msg4 signalling still takes time but consumes no
    /// CCEs or RBs.
    bool charge_signalling_resources = true;

    bool operator==(const RrcConfig&) const = default;
};

struct HarqConfig {
    /// HARQ retransmissions per transport block (L).
    std::uint32_t max_data_retransmissions = 1;
    /// A data request not started within this many subframes expires.
    std::uint32_t data_deadline_subframes = 100;

    bool operator==(const HarqConfig&) const = default;
};

struct PhyConfig {
    double dl_tx_power_dbm = 30.0;
    double ul_tx_power_dbm = 23.0;
    std::uint32_t tbs_bits_per_rb = 296;
    std::uint32_t ul_rbs_per_subframe = 6;
    std::uint32_t dl_rbs_per_subframe = 6;
    std::uint32_t cces_per_subframe = 6;
    std::string pathloss_model = "macro_log_distance";
    double noise_figure_db = 5.0;
    /// Rayleigh outage threshold. The default gives a full-band (6 RB)
    /// uplink transmission from the cell edge an error probability of ~0.1.
    double snr_threshold_db = -6.4;
    /// Carried for documentation; no computation depends on it.
    std::uint32_t earfcn_dl = 5900;
    /// Disables every channel error draw (collisions and starvation remain).
    bool channel_errors = true;

    bool operator==(const PhyConfig&) const = default;
};

struct TimingConfig {
    std::uint32_t processing_time_ms = 3;
    std::uint32_t subframe_ms = 1;
    std::uint32_t fragmentation_threshold_rbs = 6;

    bool operator==(const TimingConfig&) const = default;
};

struct EngineConfig {
    std::uint64_t master_seed = 1;
    std::uint32_t num_repetitions = 1;

    bool operator==(const EngineConfig&) const = default;
};

/// Every tunable of one experiment. Default member values are the fixed
/// parameters of the baseline cell; M, N, the packet rate and B have no
/// reference value and must be given explicitly when loading a document.
struct ScenarioConfig {
    double cell_radius_m = 1000.0;
    std::uint32_t num_mtds = 0;
    std::uint32_t num_aggregators = 0;
    double packet_rate_per_s = 0.0;
    std::uint32_t packet_size_bytes = 100;
    std::uint32_t bundle_limit = 1;
    double sim_length_s = 60.0;

    PrachConfig prach;
    RrcConfig rrc;
    HarqConfig harq;
    PhyConfig phy;
    TimingConfig timing;
    EngineConfig engine;

    bool operator==(const ScenarioConfig&) const = default;

    /// Throws ConfigError naming the first violated field.
    void validate() const;

    /// Number of nodes contending for the cell: aggregators when N >= 1,
    /// otherwise the MTDs themselves.
    std::uint32_t num_ues() const noexcept {
        return num_aggregators > 0 ? num_aggregators : num_mtds;
    }

    std::int64_t horizon_subframes() const noexcept;
};

/// Parse and validate a JSON document. Unspecified fields take defaults;
/// `num_mtds`, `num_aggregators`, `packet_rate_per_s` (or
/// `packet_rate_per_min`) and `bundle_limit` are required.
ScenarioConfig load_config(std::string_view document);

/// Full JSON document, every field present.
std::string serialize_config(const ScenarioConfig& config);

/// Set one field from a dotted key (`prach.num_preambles`) and a textual
/// value. `packet_rate_per_min` is accepted and divided by 60. Does not
/// validate the result.
void apply_override(ScenarioConfig& config, std::string_view key, std::string_view value);

/// Per-repetition seed. Injective in `repetition_index` for a fixed master.
std::uint64_t derive_run_seed(std::uint64_t master_seed, std::uint64_t repetition_index);

}  // namespace mtcagg
