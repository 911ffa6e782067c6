#include "mtcagg/link.hpp"

#include <algorithm>
#include <cmath>

#include "mtcagg/error.hpp"

namespace mtcagg {
namespace {
constexpr double near_field_floor_m = 35.0;
constexpr double rb_bandwidth_hz = 180e3;
}  // namespace

double pathloss_db(double distance_m) {
    if (!(distance_m > 0.0)) throw DomainError("pathloss_db: distance must be > 0");
    const double d = std::max(distance_m, near_field_floor_m);
    return 128.1 + 37.6 * std::log10(d / 1000.0);
}

double noise_power_dbm(std::uint32_t num_rbs, double noise_figure_db) {
    return -174.0 + 10.0 * std::log10(num_rbs * rb_bandwidth_hz) + noise_figure_db;
}

LinkBudget link_budget(double distance_m, double tx_power_dbm, std::uint32_t num_rbs,
                       double noise_figure_db) {
    LinkBudget b;
    b.distance_m = distance_m;
    b.tx_power_dbm = tx_power_dbm;
    b.pathloss_db = pathloss_db(distance_m);
    b.noise_power_dbm = noise_power_dbm(num_rbs, noise_figure_db);
    b.mean_snr_db = tx_power_dbm - b.pathloss_db - b.noise_power_dbm;
    return b;
}

double error_probability(double mean_snr_db, double snr_threshold_db) {
    return -std::expm1(-std::pow(10.0, (snr_threshold_db - mean_snr_db) / 10.0));
}

std::uint32_t required_rbs(std::uint32_t payload_bytes, std::uint32_t tbs_bits_per_rb) {
    if (payload_bytes < 1) throw DomainError("required_rbs: payload must be >= 1 byte");
    if (tbs_bits_per_rb < 1) throw DomainError("required_rbs: tbs_bits_per_rb must be >= 1");
    const std::uint64_t bits = 8ULL * payload_bytes;
    return static_cast<std::uint32_t>((bits + tbs_bits_per_rb - 1) / tbs_bits_per_rb);
}

std::uint32_t fragment_count(std::uint32_t rbs, std::uint32_t fragmentation_threshold_rbs) {
    return (rbs + fragmentation_threshold_rbs - 1) / fragmentation_threshold_rbs;
}

LinkProfile::LinkProfile(const ScenarioConfig& config, double distance_to_bs_m) {
    // Nodes at the BS position still see the near-field floor.
    const double d = std::max(distance_to_bs_m, 1e-3);
    const auto& phy = config.phy;
    for (std::uint32_t n = 1; n <= max_rbs; ++n) {
        const auto b = link_budget(d, phy.ul_tx_power_dbm, n, phy.noise_figure_db);
        ul_error_[n] = error_probability(b.mean_snr_db, phy.snr_threshold_db);
    }
    const auto dl = link_budget(d, phy.dl_tx_power_dbm, phy.dl_rbs_per_subframe, phy.noise_figure_db);
    dl_error_ = error_probability(dl.mean_snr_db, phy.snr_threshold_db);
}

double LinkProfile::uplink_error(std::uint32_t num_rbs) const {
    MTCAGG_CHECK(num_rbs >= 1 && num_rbs <= max_rbs, "rb count " << num_rbs);
    return ul_error_[num_rbs];
}

}  // namespace mtcagg
