#pragma once

/**
 * hybrid_channel — composition of scheme instances into single- and
 * multi-trapdoor channels over packet traces, plus the two attack
 * scenario generators (noisy and noiseless/protocol-hopping).
 *
 * Payload bytes are distributed round-robin over the configured trapdoors
 * in list order; each trapdoor walks its own carrier packets (packets of
 * its protocol that have its field). Embedding preserves every bit the
 * scheme does not own: the carrier choice for schemes 1 and 2 is derived
 * from the original field value, so embed is a pure function of
 * (trace, config, payload).
 */

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "covertlab/covert_schemes.hpp"
#include "covertlab/header_model.hpp"
#include "covertlab/trace.hpp"

namespace covertlab {

struct TrapdoorSpec {
    ProtocolKind proto = ProtocolKind::IPv4;
    std::string field;
    SchemeId scheme = SchemeId::IpIdModulus;

    bool operator==(const TrapdoorSpec&) const = default;
};

// "proto:field:scheme", the CLI form.
std::string to_string(const TrapdoorSpec& spec);
TrapdoorSpec trapdoor_from_string(std::string_view token);

struct HybridChannelConfig {
    std::vector<TrapdoorSpec> trapdoors;
    std::string label;
};

// Protocol a scheme is bound to, the field it must be configured on, and
// the full set of fields it writes (EspSubliminal owns two).
ProtocolKind scheme_protocol(SchemeId scheme);
std::string_view scheme_canonical_field(SchemeId scheme);
std::vector<std::string> scheme_field_family(SchemeId scheme);

// Structural validation: at least one trapdoor, every (proto, field)
// trapdoor-capable and distinct (ConfigError), and T_s(p) < T_m(p) for
// every protocol used (ConstraintError naming the protocol).
void check_config(const HybridChannelConfig& config);

// check_config plus scheme/field binding, required before embed/extract.
void check_config_for_embed(const HybridChannelConfig& config);

// delta(p) = T_m(p) - T_s(p) for each protocol the config touches.
std::map<ProtocolKind, std::size_t> trapdoor_slack(const HybridChannelConfig& config,
                                                   const TrapdoorRegistry& registry =
                                                       TrapdoorRegistry::instance());

struct EmbedResult {
    Trace trace;
    // Positions (indexes into the trace vector) of packets that carry
    // covert bytes or bits, ascending.
    std::vector<std::size_t> consumed;
    // Carrier packets claimed per trapdoor, in config order.
    std::vector<std::size_t> consumed_per_trapdoor;
};

EmbedResult embed_hybrid(const Trace& trace, const HybridChannelConfig& config,
                         const CovertPayload& payload);

CovertPayload extract_hybrid(const Trace& trace, const HybridChannelConfig& config,
                             std::size_t n_bytes);

// Largest payload the trace can carry under the round-robin split.
std::size_t channel_capacity_bytes(const Trace& trace, const HybridChannelConfig& config);

enum class ScenarioKind { Noisy, Noiseless };

struct ScenarioConfig {
    ScenarioKind kind = ScenarioKind::Noisy;
    std::size_t n_packets = 0;
    double overt_fraction = 1.0;        // noisy only; must be > 0
    std::size_t hop_period = 0;         // noiseless only; packets per hop
    std::uint64_t seed = 0;
    std::vector<ProtocolKind> mix;      // optional override of the generated mix
};

// Noisy channel: legitimate and covert users share the trace. Packets are
// designated covert candidates with probability 1 - overt_fraction; the
// payload is embedded into the candidate subsequence and consumed packets
// get covert_marker = true. Covert traffic stops when the payload runs out.
Trace scenario_noisy(const ScenarioConfig& cfg, const HybridChannelConfig& channel,
                     const CovertPayload& payload);

// Noiseless protocol-hopping channel: every packet is covert-capable and
// the active channel config rotates every hop_period packets. The payload
// is split sequentially across hops.
Trace scenario_noiseless(const ScenarioConfig& cfg,
                         const std::vector<HybridChannelConfig>& channels,
                         const CovertPayload& payload);

// Receiver side of scenario_noiseless: replays the hop schedule.
CovertPayload extract_noiseless(const Trace& trace, const ScenarioConfig& cfg,
                                const std::vector<HybridChannelConfig>& channels,
                                std::size_t n_bytes);

// Packets whose ground-truth marker is set — the covert receiver's view of
// a noisy trace.
Trace marked_only(const Trace& trace);

} // namespace covertlab
