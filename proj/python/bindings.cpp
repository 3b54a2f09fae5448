// Python bindings for the covertlab core: schemes, metrics, traces,
// hybrid channels, scenarios, detection, and the table reproduction report.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "covertlab/detector.hpp"
#include "covertlab/hybrid_channel.hpp"
#include "covertlab/metrics.hpp"
#include "covertlab/tables.hpp"
#include "covertlab/trace.hpp"

namespace py = pybind11;
using namespace covertlab;

namespace {

ProtocolKind proto_arg(const std::string& token) {
    const auto proto = protocol_from_string(token);
    if (!proto) {
        throw ConfigError("unknown protocol '" + token + "'");
    }
    return *proto;
}

Symbolizer sym_arg(const std::string& token) {
    const auto sym = symbolizer_from_string(token);
    if (!sym) {
        throw ConfigError("unknown symbolizer '" + token + "'");
    }
    return *sym;
}

std::vector<ProtocolKind> mix_arg(const std::vector<std::string>& mix) {
    std::vector<ProtocolKind> protocols;
    protocols.reserve(mix.size());
    for (const auto& token : mix) {
        protocols.push_back(proto_arg(token));
    }
    return protocols;
}

HybridChannelConfig channel_arg(const std::vector<std::string>& trapdoors) {
    HybridChannelConfig config;
    for (const auto& token : trapdoors) {
        config.trapdoors.push_back(trapdoor_from_string(token));
    }
    return config;
}

std::vector<HybridChannelConfig> channels_arg(
    const std::vector<std::vector<std::string>>& channels) {
    std::vector<HybridChannelConfig> configs;
    configs.reserve(channels.size());
    for (const auto& spec : channels) {
        configs.push_back(channel_arg(spec));
    }
    return configs;
}

CovertPayload payload_arg(const py::bytes& data) {
    const std::string raw = data;
    return CovertPayload(raw.begin(), raw.end());
}

py::bytes payload_ret(const CovertPayload& payload) {
    return py::bytes(reinterpret_cast<const char*>(payload.data()), payload.size());
}

std::vector<std::uint64_t> symbols_arg(const std::vector<std::uint64_t>& symbols) {
    return symbols;
}

} // namespace

PYBIND11_MODULE(_covertlab, m) {
    m.doc() = "hybrid covert channel simulation and entropy analysis toolkit";

    py::register_exception<CapacityError>(m, "CapacityError", PyExc_RuntimeError);
    py::register_exception<ConstraintError>(m, "ConstraintError", PyExc_ValueError);

    py::class_<PacketRecord>(m, "PacketRecord")
        .def(py::init<>())
        .def_readwrite("index", &PacketRecord::index)
        .def_property(
            "proto",
            [](const PacketRecord& pkt) { return std::string(to_string(pkt.proto)); },
            [](PacketRecord& pkt, const std::string& token) { pkt.proto = proto_arg(token); })
        .def_readwrite("fields", &PacketRecord::fields)
        .def_readwrite("covert_marker", &PacketRecord::covert_marker)
        .def("__eq__", [](const PacketRecord& a, const PacketRecord& b) { return a == b; })
        .def("__repr__", [](const PacketRecord& pkt) {
            return "<PacketRecord " + std::to_string(pkt.index) + " " +
                   std::string(to_string(pkt.proto)) + ">";
        });

    // header model
    m.def("trapdoor_capacity",
          [](const std::string& proto) { return trapdoor_capacity(proto_arg(proto)); },
          py::arg("proto"));
    m.def("field_bits",
          [](const std::string& proto, const std::string& field) {
              return field_bits(proto_arg(proto), field);
          },
          py::arg("proto"), py::arg("field"));
    m.def("validate_packet", [](const PacketRecord& pkt) {
        std::vector<std::pair<std::string, std::string>> violations;
        for (const auto& v : validate_packet(pkt).violations) {
            violations.emplace_back(v.field, v.message);
        }
        return violations;
    });

    // schemes
    m.def("scheme1_encode", &scheme1_encode, py::arg("c"), py::arg("k"),
          py::arg("alphabet") = kAsciiAlphabet);
    m.def("scheme1_decode", &scheme1_decode, py::arg("ip_id"),
          py::arg("alphabet") = kAsciiAlphabet);
    m.def("scheme2_encode", &scheme2_encode, py::arg("c"), py::arg("offset"));
    m.def("scheme2_decode", &scheme2_decode, py::arg("seq"));
    m.def("scheme3_bits", [](std::uint8_t c) {
        const auto bits = scheme3_bits(c);
        return std::vector<int>(bits.begin(), bits.end());
    });
    m.def("scheme3_encode_stream",
          [](const py::bytes& payload, const std::vector<std::uint32_t>& base) {
              return scheme3_encode_stream(payload_arg(payload), base);
          },
          py::arg("payload"), py::arg("base_timestamps"));
    m.def("scheme3_decode_stream",
          [](const std::vector<std::uint32_t>& timestamps, std::size_t n_bytes) {
              return payload_ret(scheme3_decode_stream(timestamps, n_bytes));
          },
          py::arg("timestamps"), py::arg("n_bytes"));

    // metrics
    m.def("shannon_entropy",
          [](const std::string& s) { return shannon_entropy(std::string_view(s)); });
    m.def("shannon_entropy", [](const std::vector<std::uint64_t>& symbols) {
        return shannon_entropy(std::span<const std::uint64_t>(symbols_arg(symbols)));
    });
    m.def("min_code_bits",
          [](const std::string& s) { return min_code_bits(std::string_view(s)); });
    m.def("min_code_bits", [](const std::vector<std::uint64_t>& symbols) {
        return min_code_bits(std::span<const std::uint64_t>(symbols_arg(symbols)));
    });
    m.def("covertness_ncc", &covertness_ncc, py::arg("t_set"), py::arg("t_max"));
    m.def("covertness_subliminal", &covertness_subliminal, py::arg("rounds_used"),
          py::arg("rounds_max"), py::arg("t_set"), py::arg("t_max"));
    m.def("channel_capacity", &channel_capacity, py::arg("field_bits"),
          py::arg("message_bits"));
    m.def("ce_ratio", &ce_ratio, py::arg("capacity"), py::arg("t"), py::arg("entropy"));
    m.def("embed_feasible", &embed_feasible, py::arg("message_total_bits"),
          py::arg("field_bits"));
    m.def("robustness", [](double eta, double capacity, std::size_t t, double entropy) {
        const auto report = robustness(eta, capacity, t, entropy);
        py::dict out;
        out["eta"] = report.eta;
        out["classification"] = std::string(to_string(report.classification));
        out["capacity"] = report.capacity;
        out["ce_ratio"] = report.ce_ratio;
        out["robust"] = report.robust;
        return out;
    });

    // traces
    m.def("gen_legit_trace",
          [](std::size_t n, const std::vector<std::string>& mix, std::uint64_t seed) {
              return gen_legit_trace(n, mix_arg(mix), seed);
          },
          py::arg("n_packets"), py::arg("mix"), py::arg("seed"));
    m.def("read_trace", &read_trace, py::arg("path"));
    m.def("write_trace", &write_trace, py::arg("trace"), py::arg("path"));
    m.def("render_trace", &render_trace, py::arg("trace"));
    m.def("parse_trace", [](const std::string& text) {
        std::istringstream in(text);
        return parse_trace(in);
    });

    // hybrid channels and scenarios
    m.def("embed_hybrid",
          [](const Trace& trace, const std::vector<std::string>& trapdoors,
             const py::bytes& payload) {
              auto result = embed_hybrid(trace, channel_arg(trapdoors), payload_arg(payload));
              return py::make_tuple(result.trace, result.consumed);
          },
          py::arg("trace"), py::arg("trapdoors"), py::arg("payload"));
    m.def("extract_hybrid",
          [](const Trace& trace, const std::vector<std::string>& trapdoors,
             std::size_t n_bytes) {
              return payload_ret(extract_hybrid(trace, channel_arg(trapdoors), n_bytes));
          },
          py::arg("trace"), py::arg("trapdoors"), py::arg("n_bytes"));
    m.def("channel_capacity_bytes",
          [](const Trace& trace, const std::vector<std::string>& trapdoors) {
              return channel_capacity_bytes(trace, channel_arg(trapdoors));
          },
          py::arg("trace"), py::arg("trapdoors"));
    m.def("trapdoor_slack", [](const std::vector<std::string>& trapdoors) {
        std::map<std::string, std::size_t> slack;
        for (const auto& [proto, delta] : trapdoor_slack(channel_arg(trapdoors))) {
            slack[std::string(to_string(proto))] = delta;
        }
        return slack;
    });
    m.def("scenario_noisy",
          [](std::size_t n_packets, double overt_fraction, std::uint64_t seed,
             const std::vector<std::string>& trapdoors, const py::bytes& payload) {
              ScenarioConfig cfg;
              cfg.kind = ScenarioKind::Noisy;
              cfg.n_packets = n_packets;
              cfg.overt_fraction = overt_fraction;
              cfg.seed = seed;
              return scenario_noisy(cfg, channel_arg(trapdoors), payload_arg(payload));
          },
          py::arg("n_packets"), py::arg("overt_fraction"), py::arg("seed"),
          py::arg("trapdoors"), py::arg("payload"));
    m.def("scenario_noiseless",
          [](std::size_t n_packets, std::size_t hop_period, std::uint64_t seed,
             const std::vector<std::vector<std::string>>& channels, const py::bytes& payload) {
              ScenarioConfig cfg;
              cfg.kind = ScenarioKind::Noiseless;
              cfg.n_packets = n_packets;
              cfg.hop_period = hop_period;
              cfg.seed = seed;
              return scenario_noiseless(cfg, channels_arg(channels), payload_arg(payload));
          },
          py::arg("n_packets"), py::arg("hop_period"), py::arg("seed"), py::arg("channels"),
          py::arg("payload"));
    m.def("extract_noiseless",
          [](const Trace& trace, std::size_t hop_period,
             const std::vector<std::vector<std::string>>& channels, std::size_t n_bytes) {
              ScenarioConfig cfg;
              cfg.kind = ScenarioKind::Noiseless;
              cfg.hop_period = hop_period;
              return payload_ret(extract_noiseless(trace, cfg, channels_arg(channels), n_bytes));
          },
          py::arg("trace"), py::arg("hop_period"), py::arg("channels"), py::arg("n_bytes"));
    m.def("marked_only", &marked_only, py::arg("trace"));

    // detection
    py::class_<BaselineProfile>(m, "BaselineProfile")
        .def("serialize", &BaselineProfile::serialize)
        .def("save", &BaselineProfile::save, py::arg("path"))
        .def_static("load", &BaselineProfile::load, py::arg("path"));
    m.def("build_baseline", &build_baseline, py::arg("legit_traces"),
          py::arg("window_size") = kDefaultWindowSize);
    m.def("field_entropy_series",
          [](const Trace& trace, const std::string& proto, const std::string& field,
             const std::string& sym, std::size_t window_size) {
              return field_entropy_series(trace, proto_arg(proto), field, sym_arg(sym),
                                          window_size);
          },
          py::arg("trace"), py::arg("proto"), py::arg("field"), py::arg("symbolizer"),
          py::arg("window_size") = kDefaultWindowSize);
    m.def("detect",
          [](const Trace& trace, const BaselineProfile& profile, double margin,
             std::size_t flag_threshold) {
              const auto report = detect(trace, profile, margin, flag_threshold);
              py::dict out;
              out["verdict"] = std::string(to_string(report.verdict));
              py::list flagged;
              for (const auto& [key, window] : report.flagged_windows) {
                  flagged.append(py::make_tuple(to_string(key), window));
              }
              out["flagged_windows"] = flagged;
              py::dict fields;
              for (const auto& fv : report.fields) {
                  py::dict entry;
                  entry["band_min"] = fv.band.min_entropy;
                  entry["band_max"] = fv.band.max_entropy;
                  entry["flagged"] = fv.flagged_count;
                  entry["windows"] = fv.windows.size();
                  fields[py::str(to_string(fv.key))] = entry;
              }
              out["fields"] = fields;
              return out;
          },
          py::arg("trace"), py::arg("profile"), py::arg("margin") = kDefaultMargin,
          py::arg("flag_threshold") = kDefaultFlagThreshold);

    // tables
    m.def("tables_report", [] { return render_tables_report(reproduce_tables()); });

    m.attr("PAPER_CAPACITY") = kPaperCapacity;
    m.attr("__version__") = "1.0.0";
}
