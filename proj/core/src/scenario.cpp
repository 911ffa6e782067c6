#include "mtcagg/scenario.hpp"

#include <cmath>
#include <limits>
#include <type_traits>
#include <vector>

#include "json.hpp"
#include "mtcagg/error.hpp"
#include "mtcagg/link.hpp"

namespace mtcagg {
namespace {

using nlohmann::json;

/// Calls `f(dotted_key, member)` for every serialized field, in document order.
template <class Config, class F>
void visit_fields(Config& c, F&& f) {
    f("cell_radius_m", c.cell_radius_m);
    f("num_mtds", c.num_mtds);
    f("num_aggregators", c.num_aggregators);
    f("packet_rate_per_s", c.packet_rate_per_s);
    f("packet_size_bytes", c.packet_size_bytes);
    f("bundle_limit", c.bundle_limit);
    f("sim_length_s", c.sim_length_s);

    f("prach.num_preambles", c.prach.num_preambles);
    f("prach.rao_period_subframes", c.prach.rao_period_subframes);
    f("prach.rbs_per_rao", c.prach.rbs_per_rao);
    f("prach.backoff_subframes", c.prach.backoff_subframes);
    f("prach.max_ra_attempts_per_payload", c.prach.max_ra_attempts_per_payload);
    f("prach.preamble_trans_max", c.prach.preamble_trans_max);
    f("prach.message_deadline_subframes", c.prach.message_deadline_subframes);

    f("rrc.idle_timeout_ms", c.rrc.idle_timeout_ms);
    f("rrc.post_msg4_signalling_msgs", c.rrc.post_msg4_signalling_msgs);
    f("rrc.charge_signalling_resources", c.rrc.charge_signalling_resources);

    f("harq.max_data_retransmissions", c.harq.max_data_retransmissions);
    f("harq.data_deadline_subframes", c.harq.data_deadline_subframes);

    f("phy.dl_tx_power_dbm", c.phy.dl_tx_power_dbm);
    f("phy.ul_tx_power_dbm", c.phy.ul_tx_power_dbm);
    f("phy.tbs_bits_per_rb", c.phy.tbs_bits_per_rb);
    f("phy.ul_rbs_per_subframe", c.phy.ul_rbs_per_subframe);
    f("phy.dl_rbs_per_subframe", c.phy.dl_rbs_per_subframe);
    f("phy.cces_per_subframe", c.phy.cces_per_subframe);
    f("phy.pathloss_model", c.phy.pathloss_model);
    f("phy.noise_figure_db", c.phy.noise_figure_db);
    f("phy.snr_threshold_db", c.phy.snr_threshold_db);
    f("phy.earfcn_dl", c.phy.earfcn_dl);
    f("phy.channel_errors", c.phy.channel_errors);

    f("timing.processing_time_ms", c.timing.processing_time_ms);
    f("timing.subframe_ms", c.timing.subframe_ms);
    f("timing.fragmentation_threshold_rbs", c.timing.fragmentation_threshold_rbs);

    f("engine.master_seed", c.engine.master_seed);
    f("engine.num_repetitions", c.engine.num_repetitions);
}

std::vector<std::string> split_key(std::string_view key) {
    std::vector<std::string> parts;
    std::size_t start = 0;
    while (true) {
        const auto dot = key.find('.', start);
        parts.emplace_back(key.substr(start, dot - start));
        if (dot == std::string_view::npos) break;
        start = dot + 1;
    }
    return parts;
}

template <class T>
T convert(const json& value, const std::string& key) {
    auto fail = [&](const char* expected) -> T {
        throw ConfigError(key, "field '" + key + "' must be " + expected + ", got " +
                                   value.dump());
    };
    if constexpr (std::is_same_v<T, bool>) {
        if (!value.is_boolean()) return fail("a boolean");
        return value.get<bool>();
    } else if constexpr (std::is_same_v<T, std::string>) {
        if (!value.is_string()) return fail("a string");
        return value.get<std::string>();
    } else if constexpr (std::is_floating_point_v<T>) {
        if (!value.is_number()) return fail("a number");
        return value.get<T>();
    } else {
        static_assert(std::is_unsigned_v<T>);
        if (value.is_number_unsigned()) {
            const auto raw = value.get<std::uint64_t>();
            if (raw > std::numeric_limits<T>::max()) return fail("in range");
            return static_cast<T>(raw);
        }
        if (value.is_number_integer()) return fail("a nonnegative integer");
        if (value.is_number_float()) {
            const double d = value.get<double>();
            if (d >= 0 && std::floor(d) == d && d <= static_cast<double>(std::numeric_limits<T>::max()))
                return static_cast<T>(d);
        }
        return fail("a nonnegative integer");
    }
}

const json* find_path(const json& doc, const std::vector<std::string>& path) {
    const json* node = &doc;
    for (const auto& part : path) {
        if (!node->is_object()) return nullptr;
        auto it = node->find(part);
        if (it == node->end()) return nullptr;
        node = &*it;
    }
    return node;
}

void check_known_keys(const json& doc) {
    ScenarioConfig probe;
    json known = json::object();
    visit_fields(probe, [&](const char* key, auto&) {
        auto path = split_key(key);
        json* node = &known;
        for (std::size_t i = 0; i + 1 < path.size(); ++i) node = &(*node)[path[i]];
        (*node)[path.back()] = true;
    });
    known["packet_rate_per_min"] = true;

    auto walk = [&](auto&& self, const json& node, const json& schema, const std::string& prefix) -> void {
        for (auto it = node.begin(); it != node.end(); ++it) {
            const std::string dotted = prefix.empty() ? it.key() : prefix + "." + it.key();
            auto s = schema.find(it.key());
            if (s == schema.end()) throw ConfigError(dotted, "unknown field '" + dotted + "'");
            if (s->is_object()) {
                if (!it->is_object())
                    throw ConfigError(dotted, "field '" + dotted + "' must be an object");
                self(self, *it, *s, dotted);
            }
        }
    };
    walk(walk, doc, known, "");
}

void require(bool ok, const char* field, const std::string& rule) {
    if (!ok) throw ConfigError(field, std::string("invalid '") + field + "': " + rule);
}

}  // namespace

std::int64_t ScenarioConfig::horizon_subframes() const noexcept {
    return static_cast<std::int64_t>(std::llround(sim_length_s * 1000.0 / timing.subframe_ms));
}

void ScenarioConfig::validate() const {
    require(std::isfinite(cell_radius_m) && cell_radius_m > 0, "cell_radius_m", "must be > 0");
    require(std::isfinite(packet_rate_per_s) && packet_rate_per_s >= 0, "packet_rate_per_s",
            "must be >= 0");
    require(packet_size_bytes >= 1, "packet_size_bytes", "must be >= 1");
    require(bundle_limit >= 1, "bundle_limit", "B must be >= 1");
    require(std::isfinite(sim_length_s) && sim_length_s > 0, "sim_length_s", "must be > 0");
    require(horizon_subframes() >= 1, "sim_length_s", "must span at least one subframe");

    require(prach.num_preambles >= 1, "prach.num_preambles", "must be >= 1");
    require(prach.rao_period_subframes >= 1, "prach.rao_period_subframes", "must be >= 1");
    require(prach.rbs_per_rao <= phy.ul_rbs_per_subframe, "prach.rbs_per_rao",
            "must not exceed phy.ul_rbs_per_subframe");
    require(prach.max_ra_attempts_per_payload >= 1, "prach.max_ra_attempts_per_payload",
            "K must be >= 1");
    require(prach.preamble_trans_max >= 1, "prach.preamble_trans_max", "must be >= 1");

    require(phy.tbs_bits_per_rb >= 1, "phy.tbs_bits_per_rb", "must be >= 1");
    require(phy.ul_rbs_per_subframe >= 1, "phy.ul_rbs_per_subframe", "must be >= 1");
    require(phy.dl_rbs_per_subframe >= 1, "phy.dl_rbs_per_subframe", "must be >= 1");
    require(phy.ul_rbs_per_subframe <= LinkProfile::max_rbs, "phy.ul_rbs_per_subframe", "must be <= 110");
    require(phy.dl_rbs_per_subframe <= LinkProfile::max_rbs, "phy.dl_rbs_per_subframe", "must be <= 110");
    require(phy.cces_per_subframe >= 1, "phy.cces_per_subframe", "must be >= 1");
    require(phy.pathloss_model == "macro_log_distance", "phy.pathloss_model",
            "only 'macro_log_distance' is supported");
    require(std::isfinite(phy.dl_tx_power_dbm), "phy.dl_tx_power_dbm", "must be finite");
    require(std::isfinite(phy.ul_tx_power_dbm), "phy.ul_tx_power_dbm", "must be finite");
    require(std::isfinite(phy.noise_figure_db), "phy.noise_figure_db", "must be finite");
    require(std::isfinite(phy.snr_threshold_db), "phy.snr_threshold_db", "must be finite");

    require(timing.subframe_ms == 1, "timing.subframe_ms", "the engine runs on 1 ms subframes");
    require(timing.fragmentation_threshold_rbs >= 1, "timing.fragmentation_threshold_rbs",
            "must be >= 1");
    require(timing.fragmentation_threshold_rbs <= phy.ul_rbs_per_subframe,
            "timing.fragmentation_threshold_rbs", "must not exceed phy.ul_rbs_per_subframe");

    require(engine.num_repetitions >= 1, "engine.num_repetitions", "must be >= 1");
}

ScenarioConfig load_config(std::string_view document) {
    json doc;
    try {
        doc = json::parse(document);
    } catch (const json::parse_error& e) {
        throw ConfigError("", std::string("malformed config document: ") + e.what());
    }
    if (!doc.is_object()) throw ConfigError("", "config document must be a JSON object");
    check_known_keys(doc);

    if (doc.contains("packet_rate_per_s") && doc.contains("packet_rate_per_min"))
        throw ConfigError("packet_rate_per_min",
                          "give either packet_rate_per_s or packet_rate_per_min, not both");

    std::string missing;
    for (const char* key : {"num_mtds", "num_aggregators", "bundle_limit"})
        if (!doc.contains(key)) missing += missing.empty() ? key : std::string(", ") + key;
    if (!doc.contains("packet_rate_per_s") && !doc.contains("packet_rate_per_min"))
        missing += missing.empty() ? "packet_rate_per_s" : ", packet_rate_per_s";
    if (!missing.empty())
        throw ConfigError(missing.substr(0, missing.find(',')),
                          "required fields without default: " + missing);

    ScenarioConfig config;
    visit_fields(config, [&](const char* key, auto& member) {
        if (const json* v = find_path(doc, split_key(key)))
            member = convert<std::decay_t<decltype(member)>>(*v, key);
    });
    if (const auto it = doc.find("packet_rate_per_min"); it != doc.end())
        config.packet_rate_per_s = convert<double>(*it, "packet_rate_per_min") / 60.0;

    config.validate();
    return config;
}

std::string serialize_config(const ScenarioConfig& config) {
    json doc = json::object();
    visit_fields(config, [&](const char* key, const auto& member) {
        auto path = split_key(key);
        json* node = &doc;
        for (std::size_t i = 0; i + 1 < path.size(); ++i) node = &(*node)[path[i]];
        (*node)[path.back()] = member;
    });
    return doc.dump(2);
}

void apply_override(ScenarioConfig& config, std::string_view key, std::string_view value) {
    json parsed;
    try {
        parsed = json::parse(value);
    } catch (const json::parse_error&) {
        parsed = std::string(value);  // bare strings such as model names
    }
    const std::string k(key);
    if (k == "packet_rate_per_min") {
        config.packet_rate_per_s = convert<double>(parsed, k) / 60.0;
        return;
    }
    bool found = false;
    visit_fields(config, [&](const char* name, auto& member) {
        if (k == name) {
            member = convert<std::decay_t<decltype(member)>>(parsed, k);
            found = true;
        }
    });
    if (!found) throw ConfigError(k, "unknown field '" + k + "'");
}

std::uint64_t derive_run_seed(std::uint64_t master_seed, std::uint64_t repetition_index) {
    // splitmix64 finalizer is a bijection on 64-bit words and the pre-image
    // is affine in the index with an odd multiplier, hence injective.
    std::uint64_t z = master_seed + (repetition_index + 1) * 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

}  // namespace mtcagg
