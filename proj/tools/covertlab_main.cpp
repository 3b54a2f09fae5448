// covertlab — generate, embed, extract, and analyze covert-channel traces.

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <sstream>

#include "covertlab/detector.hpp"
#include "covertlab/hybrid_channel.hpp"
#include "covertlab/metrics.hpp"
#include "covertlab/tables.hpp"
#include "covertlab/trace.hpp"

namespace {

using namespace covertlab;

std::vector<ProtocolKind> parse_mix(const std::string& mix) {
    std::vector<ProtocolKind> protocols;
    std::stringstream stream(mix);
    std::string token;
    while (std::getline(stream, token, ',')) {
        const auto proto = protocol_from_string(token);
        if (!proto || !TrapdoorRegistry::instance().has_registry(*proto)) {
            throw ConfigError("unknown protocol '" + token + "' in mix");
        }
        protocols.push_back(*proto);
    }
    if (protocols.empty()) {
        throw ConfigError("empty protocol mix");
    }
    return protocols;
}

CovertPayload parse_payload(const std::string& text, const std::string& hex) {
    if (!text.empty() && !hex.empty()) {
        throw ConfigError("give either --payload or --payload-hex, not both");
    }
    CovertPayload payload;
    if (!hex.empty()) {
        if (hex.size() % 2 != 0) {
            throw ConfigError("--payload-hex needs an even number of hex digits");
        }
        payload.reserve(hex.size() / 2);
        auto nibble = [](char c) -> unsigned {
            if (c >= '0' && c <= '9') return static_cast<unsigned>(c - '0');
            if (c >= 'a' && c <= 'f') return static_cast<unsigned>(c - 'a' + 10);
            if (c >= 'A' && c <= 'F') return static_cast<unsigned>(c - 'A' + 10);
            throw ConfigError(std::string("bad hex digit '") + c + "'");
        };
        for (std::size_t i = 0; i < hex.size(); i += 2) {
            payload.push_back(static_cast<std::uint8_t>(nibble(hex[i]) << 4 | nibble(hex[i + 1])));
        }
    } else {
        payload.assign(text.begin(), text.end());
    }
    return payload;
}

HybridChannelConfig parse_channel(const std::vector<std::string>& trapdoors) {
    HybridChannelConfig config;
    for (const auto& token : trapdoors) {
        config.trapdoors.push_back(trapdoor_from_string(token));
    }
    return config;
}

// One --channel value is a comma-joined list of proto:field:scheme triples.
std::vector<HybridChannelConfig> parse_channels(const std::vector<std::string>& channels) {
    std::vector<HybridChannelConfig> configs;
    for (const auto& spec : channels) {
        std::vector<std::string> trapdoors;
        std::stringstream stream(spec);
        std::string token;
        while (std::getline(stream, token, ',')) {
            trapdoors.push_back(token);
        }
        configs.push_back(parse_channel(trapdoors));
    }
    return configs;
}

MonitorKey parse_monitor_key(const std::string& token) {
    const auto first = token.find(':');
    const auto second = token.find(':', first == std::string::npos ? first : first + 1);
    if (first == std::string::npos || second == std::string::npos) {
        throw ConfigError("--field must be proto:field:symbolizer");
    }
    const auto proto = protocol_from_string(token.substr(0, first));
    const auto sym = symbolizer_from_string(token.substr(second + 1));
    if (!proto || !sym) {
        throw ConfigError("unknown protocol or symbolizer in '" + token + "'");
    }
    return {*proto, token.substr(first + 1, second - first - 1), *sym};
}

void print_payload(const CovertPayload& payload, bool hex) {
    if (hex) {
        for (std::uint8_t byte : payload) {
            std::printf("%02x", byte);
        }
        std::printf("\n");
    } else {
        std::fwrite(payload.data(), 1, payload.size(), stdout);
    }
}

void print_metrics_key(const Trace& trace, const MonitorKey& key, std::size_t window) {
    std::vector<std::uint64_t> symbols;
    for (const auto& pkt : trace) {
        if (pkt.proto != key.proto) continue;
        auto it = pkt.fields.find(key.field);
        if (it == pkt.fields.end()) continue;
        symbols.push_back(apply_symbolizer(it->second, key.sym));
    }
    if (symbols.empty()) {
        return;
    }
    const auto report = entropy_report(std::span<const std::uint64_t>(symbols));
    std::printf("%s samples=%zu entropy=%.6f distinct=%zu code_bits=%zu",
                to_string(key).c_str(), report.symbol_count, report.entropy_bits,
                report.distinct_symbols, report.total_code_bits);
    if (symbols.size() >= window) {
        const auto series = field_entropy_series(trace, key.proto, key.field, key.sym, window);
        double min = series.front(), max = series.front(), sum = 0.0;
        for (double h : series) {
            min = std::min(min, h);
            max = std::max(max, h);
            sum += h;
        }
        std::printf(" windows=%zu window_size=%zu win_mean=%.6f win_min=%.6f win_max=%.6f\n",
                    series.size(), window, sum / static_cast<double>(series.size()), min, max);
        std::printf("  series:");
        for (double h : series) {
            std::printf(" %.4f", h);
        }
        std::printf("\n");
    } else {
        std::printf(" windows=0 window_size=%zu (not enough samples for one window)\n", window);
    }
}

int run(int argc, char** argv) {
    CLI::App app{"covert channel trace toolkit"};
    app.require_subcommand(1);

    // gen
    auto* gen = app.add_subcommand("gen", "generate legitimate background traffic");
    std::size_t gen_packets = 0;
    std::string gen_mix = "ipv4,tcp,esp";
    std::uint64_t gen_seed = 0;
    std::string gen_out;
    gen->add_option("--packets", gen_packets, "number of packets")->required();
    gen->add_option("--mix", gen_mix, "comma list of protocols to cycle through");
    gen->add_option("--seed", gen_seed, "generator seed")->required();
    gen->add_option("--out", gen_out, "output trace file")->required();

    // embed
    auto* embed = app.add_subcommand("embed", "embed a payload through hybrid trapdoors");
    std::string embed_in, embed_out, embed_payload, embed_payload_hex;
    std::vector<std::string> embed_trapdoors;
    embed->add_option("--in", embed_in, "input trace")->required();
    embed->add_option("--out", embed_out, "output trace")->required();
    embed->add_option("--trapdoor", embed_trapdoors, "proto:field:scheme (repeatable)")
        ->required();
    embed->add_option("--payload", embed_payload, "payload text");
    embed->add_option("--payload-hex", embed_payload_hex, "payload as hex digits");

    // extract
    auto* extract = app.add_subcommand("extract", "recover a payload from a trace");
    std::string extract_in;
    std::vector<std::string> extract_trapdoors, extract_channels;
    std::size_t extract_bytes = 0, extract_hop = 0;
    bool extract_hex = false, extract_marked = false;
    extract->add_option("--in", extract_in, "input trace")->required();
    extract->add_option("--trapdoor", extract_trapdoors, "proto:field:scheme (repeatable)");
    extract->add_option("--channel", extract_channels,
                        "hop channel as comma-joined trapdoor triples (repeatable)");
    extract->add_option("--hop-period", extract_hop, "packets per hop (with --channel)");
    extract->add_option("--bytes", extract_bytes, "payload length to recover")->required();
    extract->add_flag("--hex", extract_hex, "print payload as hex");
    extract->add_flag("--marked-only", extract_marked,
                      "extract from covert-marked packets only");

    // scenario
    auto* scenario = app.add_subcommand("scenario", "generate an attack-scenario trace");
    std::string scen_kind, scen_out, scen_payload, scen_payload_hex, scen_mix;
    std::size_t scen_packets = 0, scen_hop = 0;
    double scen_overt = 0.5;
    std::uint64_t scen_seed = 0;
    std::vector<std::string> scen_trapdoors, scen_channels;
    scenario->add_option("--kind", scen_kind, "noisy|noiseless")->required();
    scenario->add_option("--packets", scen_packets, "trace length")->required();
    scenario->add_option("--overt-fraction", scen_overt, "legitimate share (noisy)");
    scenario->add_option("--hop-period", scen_hop, "packets per hop (noiseless)");
    scenario->add_option("--seed", scen_seed, "scenario seed")->required();
    scenario->add_option("--trapdoor", scen_trapdoors,
                         "channel trapdoor for noisy (repeatable)");
    scenario->add_option("--channel", scen_channels,
                         "hop channel for noiseless (repeatable)");
    scenario->add_option("--mix", scen_mix, "override generated protocol mix");
    scenario->add_option("--payload", scen_payload, "payload text");
    scenario->add_option("--payload-hex", scen_payload_hex, "payload as hex digits");
    scenario->add_option("--out", scen_out, "output trace file")->required();

    // metrics
    auto* metrics = app.add_subcommand("metrics", "windowed field-entropy report");
    std::string metrics_in, metrics_field;
    std::size_t metrics_window = kDefaultWindowSize;
    metrics->add_option("--in", metrics_in, "input trace")->required();
    metrics->add_option("--field", metrics_field, "proto:field:symbolizer");
    metrics->add_option("--window", metrics_window, "window size in samples");

    // baseline
    auto* baseline = app.add_subcommand("baseline", "learn entropy bands from clean traces");
    std::vector<std::string> baseline_in;
    std::string baseline_out;
    std::size_t baseline_window = kDefaultWindowSize;
    baseline->add_option("--in", baseline_in, "training trace (repeatable)")->required();
    baseline->add_option("--out", baseline_out, "output profile")->required();
    baseline->add_option("--window", baseline_window, "window size in samples");

    // detect
    auto* detect_cmd = app.add_subcommand("detect", "flag traces against a baseline profile");
    std::string detect_in, detect_profile;
    double detect_margin = kDefaultMargin;
    std::size_t detect_threshold = kDefaultFlagThreshold;
    detect_cmd->add_option("--in", detect_in, "input trace")->required();
    detect_cmd->add_option("--profile", detect_profile, "baseline profile")->required();
    detect_cmd->add_option("--margin", detect_margin, "entropy band margin in bits");
    detect_cmd->add_option("--flag-threshold", detect_threshold,
                           "flagged windows on one field to call a trace suspicious");

    // tables
    app.add_subcommand("tables", "reproduce the multi-trapdoor analysis tables");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return 1;
    }

    if (gen->parsed()) {
        const auto trace = gen_legit_trace(gen_packets, parse_mix(gen_mix), gen_seed);
        write_trace(trace, gen_out);
        std::printf("wrote %zu packets to %s\n", trace.size(), gen_out.c_str());
    } else if (embed->parsed()) {
        const auto trace = read_trace(embed_in);
        const auto config = parse_channel(embed_trapdoors);
        const auto payload = parse_payload(embed_payload, embed_payload_hex);
        const auto result = embed_hybrid(trace, config, payload);
        write_trace(result.trace, embed_out);
        std::printf("embedded %zu bytes over %zu trapdoors, %zu carrier packets used\n",
                    payload.size(), config.trapdoors.size(), result.consumed.size());
    } else if (extract->parsed()) {
        Trace trace = read_trace(extract_in);
        if (extract_marked) {
            trace = marked_only(trace);
        }
        CovertPayload payload;
        if (!extract_channels.empty()) {
            if (extract_hop == 0) {
                throw ConfigError("--channel extraction needs --hop-period");
            }
            ScenarioConfig cfg;
            cfg.kind = ScenarioKind::Noiseless;
            cfg.hop_period = extract_hop;
            payload = extract_noiseless(trace, cfg, parse_channels(extract_channels),
                                        extract_bytes);
        } else {
            if (extract_trapdoors.empty()) {
                throw ConfigError("extract needs --trapdoor or --channel");
            }
            payload = extract_hybrid(trace, parse_channel(extract_trapdoors), extract_bytes);
        }
        print_payload(payload, extract_hex);
    } else if (scenario->parsed()) {
        ScenarioConfig cfg;
        cfg.n_packets = scen_packets;
        cfg.seed = scen_seed;
        if (!scen_mix.empty()) {
            cfg.mix = parse_mix(scen_mix);
        }
        const auto payload = parse_payload(scen_payload, scen_payload_hex);
        Trace trace;
        if (scen_kind == "noisy") {
            cfg.kind = ScenarioKind::Noisy;
            cfg.overt_fraction = scen_overt;
            if (scen_trapdoors.empty()) {
                throw ConfigError("noisy scenario needs --trapdoor");
            }
            trace = scenario_noisy(cfg, parse_channel(scen_trapdoors), payload);
        } else if (scen_kind == "noiseless") {
            cfg.kind = ScenarioKind::Noiseless;
            cfg.overt_fraction = 0.0;
            cfg.hop_period = scen_hop;
            if (scen_channels.empty()) {
                throw ConfigError("noiseless scenario needs --channel");
            }
            trace = scenario_noiseless(cfg, parse_channels(scen_channels), payload);
        } else {
            throw ConfigError("--kind must be noisy or noiseless");
        }
        write_trace(trace, scen_out);
        std::size_t markers = 0;
        for (const auto& pkt : trace) {
            if (pkt.covert_marker.value_or(false)) ++markers;
        }
        std::printf("wrote %zu packets (%zu covert-marked) to %s\n", trace.size(), markers,
                    scen_out.c_str());
    } else if (metrics->parsed()) {
        const auto trace = read_trace(metrics_in);
        std::size_t ipv4 = 0, tcp = 0, esp = 0;
        for (const auto& pkt : trace) {
            if (pkt.proto == ProtocolKind::IPv4) ++ipv4;
            if (pkt.proto == ProtocolKind::TCP) ++tcp;
            if (pkt.proto == ProtocolKind::IPSecESP) ++esp;
        }
        std::printf("trace %s packets=%zu ipv4=%zu tcp=%zu esp=%zu window=%zu\n",
                    metrics_in.c_str(), trace.size(), ipv4, tcp, esp, metrics_window);
        if (!metrics_field.empty()) {
            print_metrics_key(trace, parse_monitor_key(metrics_field), metrics_window);
        } else {
            const auto& registry = TrapdoorRegistry::instance();
            for (ProtocolKind proto :
                 {ProtocolKind::IPv4, ProtocolKind::TCP, ProtocolKind::IPSecESP}) {
                for (const auto& d : registry.fields(proto)) {
                    if (!d.trapdoor_capable) continue;
                    for (Symbolizer sym : default_symbolizers(proto, d.name)) {
                        print_metrics_key(trace, {proto, d.name, sym}, metrics_window);
                    }
                }
            }
        }
    } else if (baseline->parsed()) {
        std::vector<Trace> traces;
        traces.reserve(baseline_in.size());
        for (const auto& path : baseline_in) {
            traces.push_back(read_trace(path));
        }
        const auto profile = build_baseline(traces, baseline_window);
        profile.save(baseline_out);
        std::printf("profile with %zu monitored fields written to %s\n",
                    profile.bands().size(), baseline_out.c_str());
    } else if (detect_cmd->parsed()) {
        const auto trace = read_trace(detect_in);
        const auto profile = BaselineProfile::load(detect_profile);
        const auto report = detect(trace, profile, detect_margin, detect_threshold);
        for (const auto& fv : report.fields) {
            std::printf("%s band=[%.6f,%.6f] windows=%zu flagged=%zu\n",
                        to_string(fv.key).c_str(), fv.band.min_entropy, fv.band.max_entropy,
                        fv.windows.size(), fv.flagged_count);
        }
        for (const auto& [key, window] : report.flagged_windows) {
            std::printf("flagged %s window %zu\n", to_string(key).c_str(), window);
        }
        std::printf("verdict: %s\n", std::string(to_string(report.verdict)).c_str());
    } else if (app.get_subcommand("tables")->parsed()) {
        std::fputs(render_tables_report(reproduce_tables()).c_str(), stdout);
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const covertlab::CapacityError& e) {
        std::cerr << "capacity error: " << e.what() << '\n';
        return 2;
    } catch (const covertlab::ConstraintError& e) {
        std::cerr << "constraint error: " << e.what() << '\n';
        return 2;
    } catch (const covertlab::ParseError& e) {
        std::cerr << "parse error: " << e.what() << '\n';
        return 3;
    } catch (const covertlab::ValidationError& e) {
        std::cerr << "validation error: " << e.what() << '\n';
        return 3;
    } catch (const covertlab::IoError& e) {
        std::cerr << "io error: " << e.what() << '\n';
        return 3;
    } catch (const covertlab::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
