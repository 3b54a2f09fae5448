#include "covertlab/trace.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace covertlab {

std::uint64_t Rng::next() {
    // splitmix64
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

std::uint32_t Rng::uniform(std::uint32_t lo, std::uint32_t hi) {
    const std::uint64_t span = static_cast<std::uint64_t>(hi) - lo + 1;
    const std::uint64_t scaled = static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next()) * span) >> 64);
    return lo + static_cast<std::uint32_t>(scaled);
}

double Rng::unit() {
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
}

Rng Rng::fork(std::uint64_t salt) {
    return Rng(next() ^ (salt * 0xD1B54A32D192ED03ull));
}

namespace {

struct FlowState {
    std::uint32_t tcp_seq = 0;
    std::uint32_t tcp_ack = 0;
    std::uint32_t tcp_ts = 0;
    std::size_t tcp_count = 0;
    std::uint32_t esp_seq = 0;
    std::uint32_t esp_spi = 0;
};

// TCP connections churn: a fresh flow (new ISN and ack) starts every
// kFlowLength segments, so sequence high bytes spread over a window the way
// mixed short-lived connections do.
constexpr std::size_t kFlowLength = 64;

PacketRecord make_ipv4(Rng& rng) {
    PacketRecord pkt;
    pkt.proto = ProtocolKind::IPv4;
    pkt.fields["version"] = 4;
    const std::uint32_t tos_roll = rng.uniform(0, 9);
    pkt.fields["tos"] = tos_roll < 7 ? 0u : (tos_roll == 7 ? 16u : (tos_roll == 8 ? 40u : 184u));
    pkt.fields["total_length"] = rng.uniform(40, 1500);
    pkt.fields["identification"] = rng.uniform(0, 65535);
    const std::uint32_t frag_roll = rng.uniform(0, 19);
    pkt.fields["flags_frag"] =
        frag_roll < 16 ? 0x4000u : (frag_roll < 19 ? 0u : (0x2000u | rng.uniform(0, 8191)));
    static constexpr std::uint32_t ttl_base[] = {64, 128, 255};
    pkt.fields["ttl"] = ttl_base[rng.uniform(0, 2)] - rng.uniform(0, 25);
    pkt.fields["protocol"] = rng.uniform(0, 4) == 0 ? 17u : 6u;
    pkt.fields["options"] = 0;
    return pkt;
}

PacketRecord make_tcp(Rng& rng, FlowState& flow) {
    PacketRecord pkt;
    pkt.proto = ProtocolKind::TCP;
    if (flow.tcp_count++ % kFlowLength == 0) {
        flow.tcp_seq = rng.uniform(0, 0xFFFFFFFFu);
        flow.tcp_ack = rng.uniform(0, 0xFFFFFFFFu);
    }
    pkt.fields["source_port"] = rng.uniform(32768, 60999);
    static constexpr std::uint32_t ports[] = {443, 443, 80, 22, 8080};
    pkt.fields["dest_port"] = ports[rng.uniform(0, 4)];
    flow.tcp_seq += rng.uniform(1, 1460);
    pkt.fields["sequence_number"] = flow.tcp_seq;
    flow.tcp_ack += rng.uniform(0, 1460);
    pkt.fields["ack_number"] = flow.tcp_ack;
    pkt.fields["data_offset"] = 8;
    pkt.fields["reserved"] = 0;
    const std::uint32_t flag_roll = rng.uniform(0, 19);
    pkt.fields["flags"] = flag_roll < 17 ? 0x10u : (flag_roll < 19 ? 0x18u : 0x02u);
    pkt.fields["flags_unused"] = 0;
    pkt.fields["window"] = rng.uniform(8192, 65535);
    pkt.fields["urgent_pointer"] = 0;
    flow.tcp_ts += rng.uniform(1, 30);
    pkt.fields["options_timestamp"] = flow.tcp_ts;
    return pkt;
}

PacketRecord make_esp(Rng& rng, FlowState& flow) {
    PacketRecord pkt;
    pkt.proto = ProtocolKind::IPSecESP;
    pkt.fields["spi"] = flow.esp_spi;
    pkt.fields["sequence_number"] = ++flow.esp_seq;
    pkt.fields["padding"] = rng.uniform(0, 255);
    return pkt;
}

} // namespace

Trace gen_legit_trace(std::size_t n_packets, const std::vector<ProtocolKind>& mix,
                      std::uint64_t seed) {
    if (mix.empty()) {
        throw ConfigError("protocol mix is empty");
    }
    for (ProtocolKind p : mix) {
        if (!TrapdoorRegistry::instance().has_registry(p)) {
            throw ConfigError("protocol " + std::string(to_string(p)) +
                              " cannot appear in generated traces");
        }
    }

    Rng rng(seed ^ 0xC0E7A5u);
    FlowState flow;
    flow.tcp_ts = rng.uniform(1000, 1u << 24);
    flow.esp_spi = rng.uniform(256, 0xFFFFFFFFu);

    Trace trace;
    trace.reserve(n_packets);
    for (std::size_t i = 0; i < n_packets; ++i) {
        PacketRecord pkt;
        switch (mix[i % mix.size()]) {
            case ProtocolKind::IPv4: pkt = make_ipv4(rng); break;
            case ProtocolKind::TCP: pkt = make_tcp(rng, flow); break;
            case ProtocolKind::IPSecESP: pkt = make_esp(rng, flow); break;
            case ProtocolKind::TLS: break; // unreachable, rejected above
        }
        pkt.index = i;
        trace.push_back(std::move(pkt));
    }
    return trace;
}

namespace {

void render_packet(std::ostream& out, const PacketRecord& pkt) {
    out << pkt.index << ' ' << to_string(pkt.proto);
    const auto& registry = TrapdoorRegistry::instance();
    for (const auto& d : registry.fields(pkt.proto)) {
        auto it = pkt.fields.find(d.name);
        if (it != pkt.fields.end()) {
            out << ' ' << d.name << '=' << it->second;
        }
    }
    if (pkt.covert_marker.has_value()) {
        out << " covert=" << (*pkt.covert_marker ? 1 : 0);
    }
    out << '\n';
}

std::uint64_t parse_number(std::string_view token, std::size_t line_no,
                           const std::string& what) {
    std::uint64_t value = 0;
    const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (ec != std::errc() || ptr != token.data() + token.size()) {
        throw ParseError("malformed " + what + " '" + std::string(token) + "'", line_no);
    }
    return value;
}

} // namespace

std::string render_trace(const Trace& trace) {
    std::ostringstream out;
    out << "covertlab-trace v1 " << trace.size() << '\n';
    for (const auto& pkt : trace) {
        render_packet(out, pkt);
    }
    return out.str();
}

Trace parse_trace(std::istream& input) {
    std::string line;
    if (!std::getline(input, line)) {
        throw ParseError("empty trace file", 1);
    }
    std::istringstream header(line);
    std::string magic, version;
    std::uint64_t declared = 0;
    if (!(header >> magic >> version >> declared) || magic != "covertlab-trace" ||
        version != "v1") {
        throw ParseError("bad header, expected 'covertlab-trace v1 <count>'", 1);
    }
    std::string rest;
    if (header >> rest) {
        throw ParseError("trailing tokens after header count", 1);
    }

    const auto& registry = TrapdoorRegistry::instance();
    Trace trace;
    trace.reserve(declared);
    std::size_t line_no = 1;
    bool have_prev_index = false;
    std::size_t prev_index = 0;

    while (std::getline(input, line)) {
        ++line_no;
        if (line.empty()) {
            throw ParseError("blank line in packet section", line_no);
        }
        std::istringstream fields_in(line);
        std::string token;
        fields_in >> token;
        PacketRecord pkt;
        pkt.index = parse_number(token, line_no, "packet index");
        if (have_prev_index && pkt.index <= prev_index) {
            throw ParseError("packet index " + std::to_string(pkt.index) +
                                 " does not increase",
                             line_no);
        }
        prev_index = pkt.index;
        have_prev_index = true;

        if (!(fields_in >> token)) {
            throw ParseError("missing protocol", line_no);
        }
        const auto proto = protocol_from_string(token);
        if (!proto || !registry.has_registry(*proto)) {
            throw ParseError("unknown trace protocol '" + token + "'", line_no);
        }
        pkt.proto = *proto;

        while (fields_in >> token) {
            const auto eq = token.find('=');
            if (eq == std::string::npos || eq == 0 || eq + 1 >= token.size()) {
                throw ParseError("malformed field assignment '" + token + "'", line_no);
            }
            const std::string name = token.substr(0, eq);
            const std::uint64_t value = parse_number(token.substr(eq + 1), line_no, "field value");
            if (name == "covert") {
                if (value > 1) {
                    throw ParseError("covert marker must be 0 or 1", line_no);
                }
                pkt.covert_marker = value == 1;
                continue;
            }
            const FieldDescriptor* d = registry.find(pkt.proto, name);
            if (!d) {
                throw ParseError("unknown field '" + name + "' for protocol " +
                                     std::string(to_string(pkt.proto)),
                                 line_no);
            }
            if (pkt.fields.count(name)) {
                throw ParseError("duplicate field '" + name + "'", line_no);
            }
            if (value >= (1ull << d->bit_width)) {
                throw ValidationError("field " + name + "=" + std::to_string(value) +
                                          " exceeds " + std::to_string(d->bit_width) + " bits",
                                      line_no);
            }
            pkt.fields[name] = static_cast<std::uint32_t>(value);
        }

        const auto validation = validate_packet(pkt);
        if (!validation.ok()) {
            throw ValidationError("invalid packet: " + validation.violations.front().field +
                                      " " + validation.violations.front().message,
                                  line_no);
        }
        trace.push_back(std::move(pkt));
    }

    if (trace.size() != declared) {
        throw ParseError("header declares " + std::to_string(declared) + " packets, file has " +
                             std::to_string(trace.size()),
                         line_no + 1);
    }
    return trace;
}

void write_trace(const Trace& trace, const std::string& path) {
    for (const auto& pkt : trace) {
        const auto validation = validate_packet(pkt);
        if (!validation.ok()) {
            throw ValidationError("refusing to write invalid packet " +
                                  std::to_string(pkt.index) + ": " +
                                  validation.violations.front().field + " " +
                                  validation.violations.front().message);
        }
    }
    std::ofstream out(path);
    if (!out) {
        throw IoError("cannot open '" + path + "' for writing");
    }
    out << render_trace(trace);
    if (!out.flush()) {
        throw IoError("short write to '" + path + "'");
    }
}

Trace read_trace(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open '" + path + "' for reading");
    }
    return parse_trace(in);
}

} // namespace covertlab
