#pragma once

#include <array>
#include <cstdint>

#include "mtcagg/scenario.hpp"

namespace mtcagg {

/// Macro-cell path loss 128.1 + 37.6 log10(d / 1 km), held constant below
/// 35 m. Throws DomainError for distance <= 0.
double pathloss_db(double distance_m);

/// Thermal noise (-174 dBm/Hz) over `num_rbs` 180 kHz resource blocks plus
/// the receiver noise figure.
double noise_power_dbm(std::uint32_t num_rbs, double noise_figure_db);

struct LinkBudget {
    double distance_m = 0.0;
    double tx_power_dbm = 0.0;
    double pathloss_db = 0.0;
    double noise_power_dbm = 0.0;
    double mean_snr_db = 0.0;
};

LinkBudget link_budget(double distance_m, double tx_power_dbm, std::uint32_t num_rbs,
                       double noise_figure_db);

/// Rayleigh block-fading outage: 1 - exp(-10^((threshold - mean_snr)/10)).
double error_probability(double mean_snr_db, double snr_threshold_db);

/// ceil(8 * payload_bytes / tbs_bits_per_rb). Throws DomainError for an
/// empty payload.
std::uint32_t required_rbs(std::uint32_t payload_bytes, std::uint32_t tbs_bits_per_rb);

/// Subframes needed when at most `fragmentation_threshold_rbs` are sent per subframe.
std::uint32_t fragment_count(std::uint32_t rbs, std::uint32_t fragmentation_threshold_rbs);

/// Per-node error probabilities, evaluated once at deployment.
class LinkProfile {
public:
    static constexpr std::uint32_t max_rbs = 110;

    LinkProfile() = default;
    LinkProfile(const ScenarioConfig& config, double distance_to_bs_m);

    /// Uplink transmission spread over `num_rbs` RBs in a subframe.
    double uplink_error(std::uint32_t num_rbs) const;
    /// Downlink message; the BS spreads its power over the whole carrier.
    double downlink_error() const noexcept { return dl_error_; }

private:
    std::array<double, max_rbs + 1> ul_error_{};
    double dl_error_ = 0.0;
};

}  // namespace mtcagg
