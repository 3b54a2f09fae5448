#pragma once

/**
 * header_model — modeled protocol headers and their trapdoor-capable fields.
 *
 * Headers are field/value maps rather than serialized byte layouts: every
 * computation downstream operates on integer field values. Each protocol
 * carries a fixed registry of FieldDescriptors; the trapdoor-capable subset
 * is the universal trapdoor set for that protocol (its size is T_m).
 */

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "covertlab/errors.hpp"

namespace covertlab {

enum class ProtocolKind { IPv4, TCP, IPSecESP, TLS };

// Short lowercase token used in trace files and on the CLI.
std::string_view to_string(ProtocolKind proto);
std::optional<ProtocolKind> protocol_from_string(std::string_view token);

struct FieldDescriptor {
    ProtocolKind proto;
    std::string name;
    unsigned bit_width = 0;        // 1..32
    bool trapdoor_capable = false;
    bool mandatory = true;         // optional fields (options, padding) may be absent
};

// Fixed per-protocol field registries. TLS is a metrics-fixture protocol
// only and has no registry: it cannot carry packets or trapdoors here.
class TrapdoorRegistry {
public:
    static const TrapdoorRegistry& instance();

    bool has_registry(ProtocolKind proto) const;

    // All registered fields for a protocol, in declaration order.
    std::span<const FieldDescriptor> fields(ProtocolKind proto) const;

    // T_m: number of trapdoor-capable fields. Throws ConfigError for TLS.
    std::size_t trapdoor_capacity(ProtocolKind proto) const;

    // Bit width of a registered field. Throws std::out_of_range when the
    // field (or the protocol registry) does not exist.
    unsigned field_bits(ProtocolKind proto, std::string_view field) const;

    const FieldDescriptor* find(ProtocolKind proto, std::string_view field) const;
    bool is_trapdoor_capable(ProtocolKind proto, std::string_view field) const;

private:
    TrapdoorRegistry();
    std::vector<FieldDescriptor> ipv4_;
    std::vector<FieldDescriptor> tcp_;
    std::vector<FieldDescriptor> esp_;
};

// Convenience forwarding helpers over the singleton registry.
std::size_t trapdoor_capacity(ProtocolKind proto);
unsigned field_bits(ProtocolKind proto, std::string_view field);

// One simulated packet. `covert_marker` is ground-truth labeling written by
// the scenario generators for evaluation; detection code never reads it.
struct PacketRecord {
    std::size_t index = 0;
    ProtocolKind proto = ProtocolKind::IPv4;
    std::map<std::string, std::uint32_t> fields;
    std::optional<bool> covert_marker;

    bool operator==(const PacketRecord&) const = default;
};

struct Violation {
    std::string field;
    std::string message;

    bool operator==(const Violation&) const = default;
};

struct ValidationResult {
    std::vector<Violation> violations;

    bool ok() const { return violations.empty(); }
};

// Checks field presence (mandatory fields), registration, and bit-width
// range. Violations are data, not exceptions.
ValidationResult validate_packet(const PacketRecord& record);

} // namespace covertlab
