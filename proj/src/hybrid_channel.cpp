#include "covertlab/hybrid_channel.hpp"

#include <algorithm>
#include <limits>
#include <set>

namespace covertlab {

std::string to_string(const TrapdoorSpec& spec) {
    return std::string(to_string(spec.proto)) + ":" + spec.field + ":" +
           std::string(to_string(spec.scheme));
}

TrapdoorSpec trapdoor_from_string(std::string_view token) {
    const auto first = token.find(':');
    const auto second = token.find(':', first == std::string_view::npos ? first : first + 1);
    if (first == std::string_view::npos || second == std::string_view::npos) {
        throw ConfigError("trapdoor spec '" + std::string(token) +
                          "' must be proto:field:scheme");
    }
    const auto proto = protocol_from_string(token.substr(0, first));
    if (!proto) {
        throw ConfigError("unknown protocol in trapdoor spec '" + std::string(token) + "'");
    }
    const auto scheme = scheme_from_string(token.substr(second + 1));
    if (!scheme) {
        throw ConfigError("unknown scheme in trapdoor spec '" + std::string(token) + "'");
    }
    TrapdoorSpec spec;
    spec.proto = *proto;
    spec.field = std::string(token.substr(first + 1, second - first - 1));
    spec.scheme = *scheme;
    return spec;
}

ProtocolKind scheme_protocol(SchemeId scheme) {
    switch (scheme) {
        case SchemeId::IpIdModulus: return ProtocolKind::IPv4;
        case SchemeId::SeqScale: return ProtocolKind::TCP;
        case SchemeId::TimestampLsb: return ProtocolKind::TCP;
        case SchemeId::EspSubliminal: return ProtocolKind::IPSecESP;
    }
    return ProtocolKind::IPv4;
}

std::string_view scheme_canonical_field(SchemeId scheme) {
    switch (scheme) {
        case SchemeId::IpIdModulus: return "identification";
        case SchemeId::SeqScale: return "sequence_number";
        case SchemeId::TimestampLsb: return "options_timestamp";
        case SchemeId::EspSubliminal: return "sequence_number";
    }
    return "";
}

std::vector<std::string> scheme_field_family(SchemeId scheme) {
    if (scheme == SchemeId::EspSubliminal) {
        return {"sequence_number", "padding"};
    }
    return {std::string(scheme_canonical_field(scheme))};
}

void check_config(const HybridChannelConfig& config) {
    if (config.trapdoors.empty()) {
        throw ConfigError("channel config has no trapdoors");
    }
    const auto& registry = TrapdoorRegistry::instance();
    std::set<std::pair<ProtocolKind, std::string>> seen;
    std::map<ProtocolKind, std::size_t> t_set;
    for (const auto& spec : config.trapdoors) {
        if (!registry.has_registry(spec.proto)) {
            throw ConfigError("protocol " + std::string(to_string(spec.proto)) +
                              " cannot carry trapdoors");
        }
        if (!registry.is_trapdoor_capable(spec.proto, spec.field)) {
            throw ConfigError("field " + std::string(to_string(spec.proto)) + ":" +
                              spec.field + " is not trapdoor-capable");
        }
        if (!seen.insert({spec.proto, spec.field}).second) {
            throw ConfigError("duplicate trapdoor on " + std::string(to_string(spec.proto)) +
                              ":" + spec.field);
        }
        ++t_set[spec.proto];
    }
    for (const auto& [proto, count] : t_set) {
        const std::size_t t_max = registry.trapdoor_capacity(proto);
        if (count >= t_max) {
            throw ConstraintError("T_s=" + std::to_string(count) + " >= T_m=" +
                                  std::to_string(t_max) + " for protocol " +
                                  std::string(to_string(proto)) +
                                  "; the trapdoor count must stay strictly below the maximum");
        }
    }
}

void check_config_for_embed(const HybridChannelConfig& config) {
    check_config(config);
    for (const auto& spec : config.trapdoors) {
        if (spec.proto != scheme_protocol(spec.scheme) ||
            spec.field != scheme_canonical_field(spec.scheme)) {
            throw ConfigError("scheme " + std::string(to_string(spec.scheme)) +
                              " is bound to " +
                              std::string(to_string(scheme_protocol(spec.scheme))) + ":" +
                              std::string(scheme_canonical_field(spec.scheme)) +
                              ", cannot run on " + std::string(to_string(spec.proto)) + ":" +
                              spec.field);
        }
    }
}

std::map<ProtocolKind, std::size_t> trapdoor_slack(const HybridChannelConfig& config,
                                                   const TrapdoorRegistry& registry) {
    if (config.trapdoors.empty()) {
        throw ConfigError("channel config has no trapdoors");
    }
    std::map<ProtocolKind, std::size_t> t_set;
    for (const auto& spec : config.trapdoors) {
        if (!registry.is_trapdoor_capable(spec.proto, spec.field)) {
            throw ConfigError("field " + std::string(to_string(spec.proto)) + ":" +
                              spec.field + " is not trapdoor-capable");
        }
        ++t_set[spec.proto];
    }
    std::map<ProtocolKind, std::size_t> slack;
    for (const auto& [proto, count] : t_set) {
        const std::size_t t_max = registry.trapdoor_capacity(proto);
        if (count >= t_max) {
            throw ConstraintError("T_s=" + std::to_string(count) + " >= T_m=" +
                                  std::to_string(t_max) + " for protocol " +
                                  std::string(to_string(proto)));
        }
        slack[proto] = t_max - count;
    }
    return slack;
}

namespace {

// Positions of packets that can carry this trapdoor: right protocol with
// every family field present.
std::vector<std::size_t> carrier_positions(const Trace& trace, const TrapdoorSpec& spec) {
    const auto family = scheme_field_family(spec.scheme);
    std::vector<std::size_t> positions;
    for (std::size_t i = 0; i < trace.size(); ++i) {
        if (trace[i].proto != spec.proto) continue;
        const bool complete = std::all_of(family.begin(), family.end(), [&](const auto& f) {
            return trace[i].fields.count(f) > 0;
        });
        if (complete) positions.push_back(i);
    }
    return positions;
}

// Carrier packets one trapdoor needs for `n_bytes` of its share.
std::size_t packets_needed(SchemeId scheme, std::size_t n_bytes) {
    switch (scheme) {
        case SchemeId::IpIdModulus:
        case SchemeId::SeqScale: return n_bytes;
        case SchemeId::TimestampLsb: return n_bytes * 8;
        case SchemeId::EspSubliminal: return (n_bytes + 1) / 2;
    }
    return n_bytes;
}

// Byte budget of one trapdoor given its carrier count.
std::size_t byte_budget(SchemeId scheme, std::size_t carriers) {
    switch (scheme) {
        case SchemeId::IpIdModulus:
        case SchemeId::SeqScale: return carriers;
        case SchemeId::TimestampLsb: return carriers / 8;
        case SchemeId::EspSubliminal: return carriers * 2;
    }
    return carriers;
}

std::vector<CovertPayload> split_round_robin(const CovertPayload& payload, std::size_t m) {
    std::vector<CovertPayload> parts(m);
    for (std::size_t i = 0; i < payload.size(); ++i) {
        parts[i % m].push_back(payload[i]);
    }
    return parts;
}

// Byte counts each trapdoor receives for an n-byte payload.
std::vector<std::size_t> round_robin_counts(std::size_t n_bytes, std::size_t m) {
    std::vector<std::size_t> counts(m, n_bytes / m);
    for (std::size_t j = 0; j < n_bytes % m; ++j) {
        ++counts[j];
    }
    return counts;
}

void require_capacity(const TrapdoorSpec& spec, std::size_t carriers, std::size_t n_bytes) {
    const std::size_t needed = packets_needed(spec.scheme, n_bytes);
    if (carriers < needed) {
        throw CapacityError("trapdoor " + to_string(spec) + " starved: needs " +
                            std::to_string(needed) + " carrier packets for " +
                            std::to_string(n_bytes) + " bytes, trace provides " +
                            std::to_string(carriers));
    }
}

std::uint32_t embed_ipid(std::uint32_t original, std::uint8_t byte) {
    // Keep the carrier close to the original value: reuse its high byte as
    // the free choice k, clamped into the valid range.
    const unsigned k = std::min(original >> 8, scheme1_max_k(byte));
    return scheme1_encode(byte, k);
}

std::uint32_t embed_seq(std::uint32_t original, std::uint8_t byte) {
    return scheme2_encode(byte, original & 0x00FFFFFFu);
}

// Embeds one trapdoor's share; returns the positions that carry payload.
std::vector<std::size_t> apply_embed(Trace& trace, const TrapdoorSpec& spec,
                                     const CovertPayload& part) {
    const auto carriers = carrier_positions(trace, spec);
    require_capacity(spec, carriers.size(), part.size());
    std::vector<std::size_t> used;

    switch (spec.scheme) {
        case SchemeId::IpIdModulus:
            for (std::size_t i = 0; i < part.size(); ++i) {
                auto& value = trace[carriers[i]].fields.at("identification");
                value = embed_ipid(value, part[i]);
                used.push_back(carriers[i]);
            }
            break;
        case SchemeId::SeqScale:
            for (std::size_t i = 0; i < part.size(); ++i) {
                auto& value = trace[carriers[i]].fields.at("sequence_number");
                value = embed_seq(value, part[i]);
                used.push_back(carriers[i]);
            }
            break;
        case SchemeId::TimestampLsb: {
            std::vector<std::uint32_t> timestamps;
            timestamps.reserve(carriers.size());
            for (std::size_t pos : carriers) {
                timestamps.push_back(trace[pos].fields.at("options_timestamp"));
            }
            const auto adjusted = scheme3_encode_stream(part, timestamps);
            for (std::size_t i = 0; i < carriers.size(); ++i) {
                trace[carriers[i]].fields.at("options_timestamp") = adjusted[i];
            }
            used.assign(carriers.begin(), carriers.begin() +
                                              static_cast<std::ptrdiff_t>(part.size() * 8));
            break;
        }
        case SchemeId::EspSubliminal: {
            const std::size_t claimed = packets_needed(spec.scheme, part.size());
            std::vector<PacketRecord> sub;
            sub.reserve(claimed);
            for (std::size_t i = 0; i < claimed; ++i) {
                sub.push_back(trace[carriers[i]]);
            }
            sub = esp_subliminal_embed(part, std::move(sub));
            for (std::size_t i = 0; i < claimed; ++i) {
                trace[carriers[i]] = std::move(sub[i]);
                used.push_back(carriers[i]);
            }
            break;
        }
    }
    return used;
}

CovertPayload apply_extract(const Trace& trace, const TrapdoorSpec& spec,
                            std::size_t n_bytes) {
    const auto carriers = carrier_positions(trace, spec);
    require_capacity(spec, carriers.size(), n_bytes);
    CovertPayload part;
    part.reserve(n_bytes);

    switch (spec.scheme) {
        case SchemeId::IpIdModulus:
            for (std::size_t i = 0; i < n_bytes; ++i) {
                part.push_back(scheme1_decode(static_cast<std::uint16_t>(
                    trace[carriers[i]].fields.at("identification"))));
            }
            break;
        case SchemeId::SeqScale:
            for (std::size_t i = 0; i < n_bytes; ++i) {
                part.push_back(scheme2_decode(trace[carriers[i]].fields.at("sequence_number")));
            }
            break;
        case SchemeId::TimestampLsb: {
            std::vector<std::uint32_t> timestamps;
            timestamps.reserve(n_bytes * 8);
            for (std::size_t i = 0; i < n_bytes * 8; ++i) {
                timestamps.push_back(trace[carriers[i]].fields.at("options_timestamp"));
            }
            part = scheme3_decode_stream(timestamps, n_bytes);
            break;
        }
        case SchemeId::EspSubliminal: {
            std::vector<PacketRecord> sub;
            sub.reserve(packets_needed(spec.scheme, n_bytes));
            for (std::size_t i = 0; i < packets_needed(spec.scheme, n_bytes); ++i) {
                sub.push_back(trace[carriers[i]]);
            }
            part = esp_subliminal_extract(sub, n_bytes);
            break;
        }
    }
    return part;
}

} // namespace

EmbedResult embed_hybrid(const Trace& trace, const HybridChannelConfig& config,
                         const CovertPayload& payload) {
    check_config_for_embed(config);
    const std::size_t m = config.trapdoors.size();
    const auto parts = split_round_robin(payload, m);

    EmbedResult result;
    result.trace = trace;
    result.consumed_per_trapdoor.resize(m, 0);
    for (std::size_t j = 0; j < m; ++j) {
        if (parts[j].empty()) continue;
        auto used = apply_embed(result.trace, config.trapdoors[j], parts[j]);
        result.consumed_per_trapdoor[j] = used.size();
        result.consumed.insert(result.consumed.end(), used.begin(), used.end());
    }
    std::sort(result.consumed.begin(), result.consumed.end());
    result.consumed.erase(std::unique(result.consumed.begin(), result.consumed.end()),
                          result.consumed.end());
    return result;
}

CovertPayload extract_hybrid(const Trace& trace, const HybridChannelConfig& config,
                             std::size_t n_bytes) {
    check_config_for_embed(config);
    const std::size_t m = config.trapdoors.size();
    const auto counts = round_robin_counts(n_bytes, m);

    std::vector<CovertPayload> parts(m);
    for (std::size_t j = 0; j < m; ++j) {
        parts[j] = apply_extract(trace, config.trapdoors[j], counts[j]);
    }

    CovertPayload payload;
    payload.reserve(n_bytes);
    for (std::size_t i = 0; i < n_bytes; ++i) {
        payload.push_back(parts[i % m][i / m]);
    }
    return payload;
}

std::size_t channel_capacity_bytes(const Trace& trace, const HybridChannelConfig& config) {
    check_config_for_embed(config);
    const std::size_t m = config.trapdoors.size();
    std::size_t cap = std::numeric_limits<std::size_t>::max();
    for (std::size_t j = 0; j < m; ++j) {
        const auto carriers = carrier_positions(trace, config.trapdoors[j]);
        const std::size_t budget = byte_budget(config.trapdoors[j].scheme, carriers.size());
        // Round-robin: byte i lands on trapdoor i mod m, so trapdoor j
        // overflows first at payload length j + budget*m + 1.
        cap = std::min(cap, j + budget * m);
    }
    return cap;
}

namespace {

std::vector<ProtocolKind> default_mix(const std::vector<HybridChannelConfig>& channels,
                                      bool with_background) {
    std::set<ProtocolKind> used;
    for (const auto& channel : channels) {
        for (const auto& spec : channel.trapdoors) {
            used.insert(spec.proto);
        }
    }
    if (with_background) {
        used.insert(ProtocolKind::IPv4);
        used.insert(ProtocolKind::TCP);
    }
    std::vector<ProtocolKind> mix;
    for (ProtocolKind p : {ProtocolKind::IPv4, ProtocolKind::TCP, ProtocolKind::IPSecESP}) {
        if (used.count(p)) mix.push_back(p);
    }
    return mix;
}

} // namespace

Trace scenario_noisy(const ScenarioConfig& cfg, const HybridChannelConfig& channel,
                     const CovertPayload& payload) {
    if (cfg.kind != ScenarioKind::Noisy) {
        throw ConfigError("scenario config is not noisy");
    }
    if (!(cfg.overt_fraction > 0.0) || cfg.overt_fraction > 1.0) {
        throw ConfigError("noisy scenario needs overt_fraction in (0, 1]");
    }
    check_config_for_embed(channel);

    const auto mix = cfg.mix.empty() ? default_mix({channel}, true) : cfg.mix;
    Trace trace = gen_legit_trace(cfg.n_packets, mix, cfg.seed);

    Rng pick = Rng(cfg.seed).fork(0x6E6F6973u);
    std::vector<std::size_t> candidates;
    for (std::size_t i = 0; i < trace.size(); ++i) {
        if (pick.unit() < 1.0 - cfg.overt_fraction) {
            candidates.push_back(i);
        }
    }

    Trace covert_sub;
    covert_sub.reserve(candidates.size());
    for (std::size_t pos : candidates) {
        covert_sub.push_back(trace[pos]);
    }

    EmbedResult embedded = embed_hybrid(covert_sub, channel, payload);
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        trace[candidates[i]] = std::move(embedded.trace[i]);
    }
    for (std::size_t sub_pos : embedded.consumed) {
        trace[candidates[sub_pos]].covert_marker = true;
    }
    return trace;
}

Trace scenario_noiseless(const ScenarioConfig& cfg,
                         const std::vector<HybridChannelConfig>& channels,
                         const CovertPayload& payload) {
    if (cfg.kind != ScenarioKind::Noiseless) {
        throw ConfigError("scenario config is not noiseless");
    }
    if (channels.empty()) {
        throw ConfigError("noiseless scenario needs at least one channel");
    }
    if (cfg.hop_period == 0) {
        throw ConfigError("noiseless scenario needs hop_period >= 1");
    }
    for (const auto& channel : channels) {
        check_config_for_embed(channel);
    }

    const auto mix = cfg.mix.empty() ? default_mix(channels, false) : cfg.mix;
    Trace trace = gen_legit_trace(cfg.n_packets, mix, cfg.seed);

    std::size_t offset = 0; // payload bytes already placed
    for (std::size_t hop = 0; hop * cfg.hop_period < trace.size(); ++hop) {
        const std::size_t begin = hop * cfg.hop_period;
        const std::size_t end = std::min(trace.size(), begin + cfg.hop_period);
        const auto& channel = channels[hop % channels.size()];

        Trace window(trace.begin() + static_cast<std::ptrdiff_t>(begin),
                     trace.begin() + static_cast<std::ptrdiff_t>(end));
        const std::size_t take =
            std::min(payload.size() - offset, channel_capacity_bytes(window, channel));
        CovertPayload slice(payload.begin() + static_cast<std::ptrdiff_t>(offset),
                            payload.begin() + static_cast<std::ptrdiff_t>(offset + take));

        EmbedResult embedded = embed_hybrid(window, channel, slice);
        for (std::size_t i = 0; i < window.size(); ++i) {
            trace[begin + i] = std::move(embedded.trace[i]);
        }
        for (std::size_t sub_pos : embedded.consumed) {
            trace[begin + sub_pos].covert_marker = true;
        }
        offset += take;
        if (offset == payload.size()) break;
    }
    if (offset < payload.size()) {
        throw CapacityError("noiseless scenario placed " + std::to_string(offset) + " of " +
                            std::to_string(payload.size()) + " payload bytes; trace too short");
    }
    return trace;
}

CovertPayload extract_noiseless(const Trace& trace, const ScenarioConfig& cfg,
                                const std::vector<HybridChannelConfig>& channels,
                                std::size_t n_bytes) {
    if (channels.empty() || cfg.hop_period == 0) {
        throw ConfigError("noiseless extraction needs channels and hop_period >= 1");
    }
    CovertPayload payload;
    payload.reserve(n_bytes);
    for (std::size_t hop = 0; hop * cfg.hop_period < trace.size(); ++hop) {
        const std::size_t begin = hop * cfg.hop_period;
        const std::size_t end = std::min(trace.size(), begin + cfg.hop_period);
        const auto& channel = channels[hop % channels.size()];

        Trace window(trace.begin() + static_cast<std::ptrdiff_t>(begin),
                     trace.begin() + static_cast<std::ptrdiff_t>(end));
        const std::size_t take =
            std::min(n_bytes - payload.size(), channel_capacity_bytes(window, channel));
        const auto slice = extract_hybrid(window, channel, take);
        payload.insert(payload.end(), slice.begin(), slice.end());
        if (payload.size() == n_bytes) break;
    }
    if (payload.size() < n_bytes) {
        throw CapacityError("noiseless extraction recovered " + std::to_string(payload.size()) +
                            " of " + std::to_string(n_bytes) + " bytes");
    }
    return payload;
}

Trace marked_only(const Trace& trace) {
    Trace marked;
    for (const auto& pkt : trace) {
        if (pkt.covert_marker.value_or(false)) {
            marked.push_back(pkt);
        }
    }
    return marked;
}

} // namespace covertlab
