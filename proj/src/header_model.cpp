#include "covertlab/header_model.hpp"

#include <algorithm>

namespace covertlab {

std::string_view to_string(ProtocolKind proto) {
    switch (proto) {
        case ProtocolKind::IPv4: return "ipv4";
        case ProtocolKind::TCP: return "tcp";
        case ProtocolKind::IPSecESP: return "esp";
        case ProtocolKind::TLS: return "tls";
    }
    return "?";
}

std::optional<ProtocolKind> protocol_from_string(std::string_view token) {
    if (token == "ipv4") return ProtocolKind::IPv4;
    if (token == "tcp") return ProtocolKind::TCP;
    if (token == "esp") return ProtocolKind::IPSecESP;
    if (token == "tls") return ProtocolKind::TLS;
    return std::nullopt;
}

TrapdoorRegistry::TrapdoorRegistry() {
    auto f = [](ProtocolKind p, const char* name, unsigned bits, bool trapdoor,
                bool mandatory = true) {
        return FieldDescriptor{p, name, bits, trapdoor, mandatory};
    };

    const auto P4 = ProtocolKind::IPv4;
    ipv4_ = {
        f(P4, "version", 4, false),
        f(P4, "tos", 8, true),
        f(P4, "total_length", 16, false),
        f(P4, "identification", 16, true),
        f(P4, "flags_frag", 16, true),   // flags + fragment offset as one field
        f(P4, "ttl", 8, false),
        f(P4, "protocol", 8, false),
        f(P4, "options", 32, true, /*mandatory=*/false),
    };

    const auto PT = ProtocolKind::TCP;
    tcp_ = {
        f(PT, "source_port", 16, false),
        f(PT, "dest_port", 16, false),
        f(PT, "sequence_number", 32, true),
        f(PT, "ack_number", 32, true),
        f(PT, "data_offset", 4, false),
        f(PT, "reserved", 4, true),
        f(PT, "flags", 6, false),
        f(PT, "flags_unused", 2, true),
        f(PT, "window", 16, true),
        f(PT, "urgent_pointer", 16, true),
        f(PT, "options_timestamp", 32, true, /*mandatory=*/false),
    };

    const auto PE = ProtocolKind::IPSecESP;
    esp_ = {
        f(PE, "spi", 32, false),
        f(PE, "sequence_number", 32, true),
        f(PE, "padding", 8, true, /*mandatory=*/false),
    };
}

const TrapdoorRegistry& TrapdoorRegistry::instance() {
    static const TrapdoorRegistry registry;
    return registry;
}

bool TrapdoorRegistry::has_registry(ProtocolKind proto) const {
    return proto != ProtocolKind::TLS;
}

std::span<const FieldDescriptor> TrapdoorRegistry::fields(ProtocolKind proto) const {
    switch (proto) {
        case ProtocolKind::IPv4: return ipv4_;
        case ProtocolKind::TCP: return tcp_;
        case ProtocolKind::IPSecESP: return esp_;
        case ProtocolKind::TLS: return {};
    }
    return {};
}

std::size_t TrapdoorRegistry::trapdoor_capacity(ProtocolKind proto) const {
    if (!has_registry(proto)) {
        throw ConfigError("fixture-only protocol: " + std::string(to_string(proto)) +
                          " has no trapdoor registry");
    }
    auto all = fields(proto);
    return static_cast<std::size_t>(
        std::count_if(all.begin(), all.end(),
                      [](const FieldDescriptor& d) { return d.trapdoor_capable; }));
}

const FieldDescriptor* TrapdoorRegistry::find(ProtocolKind proto,
                                              std::string_view field) const {
    for (const auto& d : fields(proto)) {
        if (d.name == field) return &d;
    }
    return nullptr;
}

unsigned TrapdoorRegistry::field_bits(ProtocolKind proto, std::string_view field) const {
    const FieldDescriptor* d = find(proto, field);
    if (!d) {
        throw std::out_of_range("unknown field '" + std::string(field) + "' for protocol " +
                                std::string(to_string(proto)));
    }
    return d->bit_width;
}

bool TrapdoorRegistry::is_trapdoor_capable(ProtocolKind proto,
                                           std::string_view field) const {
    const FieldDescriptor* d = find(proto, field);
    return d && d->trapdoor_capable;
}

std::size_t trapdoor_capacity(ProtocolKind proto) {
    return TrapdoorRegistry::instance().trapdoor_capacity(proto);
}

unsigned field_bits(ProtocolKind proto, std::string_view field) {
    return TrapdoorRegistry::instance().field_bits(proto, field);
}

ValidationResult validate_packet(const PacketRecord& record) {
    ValidationResult result;
    const auto& registry = TrapdoorRegistry::instance();

    if (!registry.has_registry(record.proto)) {
        result.violations.push_back(
            {"", "protocol " + std::string(to_string(record.proto)) +
                     " has no field registry"});
        return result;
    }

    for (const auto& d : registry.fields(record.proto)) {
        auto it = record.fields.find(d.name);
        if (it == record.fields.end()) {
            if (d.mandatory) {
                result.violations.push_back({d.name, "missing mandatory field"});
            }
            continue;
        }
        const std::uint64_t limit = 1ull << d.bit_width;
        if (it->second >= limit) {
            result.violations.push_back(
                {d.name, "value " + std::to_string(it->second) + " exceeds " +
                             std::to_string(d.bit_width) + " bits"});
        }
    }

    for (const auto& [name, value] : record.fields) {
        (void)value;
        if (!registry.find(record.proto, name)) {
            result.violations.push_back({name, "unknown field for protocol " +
                                                   std::string(to_string(record.proto))});
        }
    }

    return result;
}

} // namespace covertlab
