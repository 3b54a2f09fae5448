#include "covertlab/detector.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "covertlab/metrics.hpp"

namespace covertlab {

std::string_view to_string(Symbolizer sym) {
    switch (sym) {
        case Symbolizer::LowByte: return "lowbyte";
        case Symbolizer::HighByte: return "highbyte";
        case Symbolizer::Lsb: return "lsb";
    }
    return "?";
}

std::optional<Symbolizer> symbolizer_from_string(std::string_view token) {
    if (token == "lowbyte") return Symbolizer::LowByte;
    if (token == "highbyte") return Symbolizer::HighByte;
    if (token == "lsb") return Symbolizer::Lsb;
    return std::nullopt;
}

std::uint64_t apply_symbolizer(std::uint32_t value, Symbolizer sym) {
    switch (sym) {
        case Symbolizer::LowByte: return value & 0xFFu;
        case Symbolizer::HighByte: return value >> 24;
        case Symbolizer::Lsb: return value & 1u;
    }
    return 0;
}

std::vector<Symbolizer> default_symbolizers(ProtocolKind proto, const std::string& field) {
    if (proto == ProtocolKind::TCP && field == "sequence_number") {
        return {Symbolizer::HighByte};
    }
    if (proto == ProtocolKind::TCP && field == "options_timestamp") {
        return {Symbolizer::Lsb};
    }
    return {Symbolizer::LowByte};
}

std::string to_string(const MonitorKey& key) {
    return std::string(to_string(key.proto)) + ":" + key.field + ":" +
           std::string(to_string(key.sym));
}

std::string_view to_string(Verdict v) {
    return v == Verdict::Clean ? "Clean" : "Suspicious";
}

void BaselineProfile::set(const MonitorKey& key, const BaselineBand& band) {
    if (band.min_entropy > band.mean_entropy || band.mean_entropy > band.max_entropy) {
        throw ConfigError("baseline band for " + to_string(key) +
                          " violates min <= mean <= max");
    }
    if (band.window_size < kMinWindowSize) {
        throw ConfigError("baseline window size must be >= " +
                          std::to_string(kMinWindowSize));
    }
    bands_[key] = band;
}

std::string BaselineProfile::serialize() const {
    std::ostringstream out;
    char buf[128];
    for (const auto& [key, band] : bands_) {
        std::snprintf(buf, sizeof(buf), "%.6f %.6f %.6f", band.min_entropy,
                      band.mean_entropy, band.max_entropy);
        out << to_string(key.proto) << ' ' << key.field << ' ' << to_string(key.sym) << ' '
            << buf << ' ' << band.window_size << '\n';
    }
    return out.str();
}

BaselineProfile BaselineProfile::parse(std::istream& input) {
    BaselineProfile profile;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(input, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::istringstream tokens(line);
        std::string proto_tok, field, sym_tok;
        BaselineBand band;
        if (!(tokens >> proto_tok >> field >> sym_tok >> band.min_entropy >>
              band.mean_entropy >> band.max_entropy >> band.window_size)) {
            throw ParseError("malformed profile line", line_no);
        }
        std::string rest;
        if (tokens >> rest) {
            throw ParseError("trailing tokens in profile line", line_no);
        }
        const auto proto = protocol_from_string(proto_tok);
        const auto sym = symbolizer_from_string(sym_tok);
        if (!proto || !sym) {
            throw ParseError("unknown protocol or symbolizer in profile", line_no);
        }
        try {
            profile.set({*proto, field, *sym}, band);
        } catch (const ConfigError& e) {
            throw ParseError(e.what(), line_no);
        }
    }
    return profile;
}

void BaselineProfile::save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) {
        throw IoError("cannot open '" + path + "' for writing");
    }
    out << serialize();
    if (!out.flush()) {
        throw IoError("short write to '" + path + "'");
    }
}

BaselineProfile BaselineProfile::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open '" + path + "' for reading");
    }
    return parse(in);
}

namespace {

std::vector<std::uint64_t> symbol_stream(const Trace& trace, ProtocolKind proto,
                                         const std::string& field, Symbolizer sym) {
    std::vector<std::uint64_t> symbols;
    for (const auto& pkt : trace) {
        if (pkt.proto != proto) continue;
        auto it = pkt.fields.find(field);
        if (it == pkt.fields.end()) continue;
        symbols.push_back(apply_symbolizer(it->second, sym));
    }
    return symbols;
}

std::vector<double> window_entropies(const std::vector<std::uint64_t>& symbols,
                                     std::size_t window_size) {
    std::vector<double> series;
    const std::size_t windows = symbols.size() / window_size;
    series.reserve(windows);
    for (std::size_t w = 0; w < windows; ++w) {
        series.push_back(shannon_entropy(std::span<const std::uint64_t>(
            symbols.data() + w * window_size, window_size)));
    }
    return series;
}

} // namespace

std::vector<double> field_entropy_series(const Trace& trace, ProtocolKind proto,
                                         const std::string& field, Symbolizer sym,
                                         std::size_t window_size) {
    if (window_size == 0) {
        throw std::domain_error("window size must be >= 1");
    }
    const auto symbols = symbol_stream(trace, proto, field, sym);
    if (symbols.size() < window_size) {
        throw std::domain_error("trace has " + std::to_string(symbols.size()) + " " +
                                std::string(to_string(proto)) + ":" + field +
                                " samples, need at least one window of " +
                                std::to_string(window_size));
    }
    return window_entropies(symbols, window_size);
}

BaselineProfile build_baseline(const std::vector<Trace>& legit_traces,
                               std::size_t window_size) {
    if (window_size < kMinWindowSize) {
        throw std::invalid_argument("window size must be >= " +
                                    std::to_string(kMinWindowSize));
    }
    if (legit_traces.empty()) {
        throw TrainingError("no training traces");
    }
    for (const auto& trace : legit_traces) {
        for (const auto& pkt : trace) {
            const auto validation = validate_packet(pkt);
            if (!validation.ok()) {
                throw ValidationError("training packet " + std::to_string(pkt.index) +
                                      " invalid: " + validation.violations.front().field +
                                      " " + validation.violations.front().message);
            }
        }
    }

    struct Accum {
        double min = 0.0, max = 0.0, sum = 0.0;
        std::size_t n = 0;
    };
    std::map<MonitorKey, Accum> accum;

    const auto& registry = TrapdoorRegistry::instance();
    for (const auto& trace : legit_traces) {
        for (ProtocolKind proto :
             {ProtocolKind::IPv4, ProtocolKind::TCP, ProtocolKind::IPSecESP}) {
            for (const auto& d : registry.fields(proto)) {
                if (!d.trapdoor_capable) continue;
                for (Symbolizer sym : default_symbolizers(proto, d.name)) {
                    const auto symbols = symbol_stream(trace, proto, d.name, sym);
                    if (symbols.size() < window_size) continue;
                    for (double h : window_entropies(symbols, window_size)) {
                        auto& a = accum[{proto, d.name, sym}];
                        if (a.n == 0) {
                            a.min = a.max = h;
                        } else {
                            a.min = std::min(a.min, h);
                            a.max = std::max(a.max, h);
                        }
                        a.sum += h;
                        ++a.n;
                    }
                }
            }
        }
    }

    if (accum.empty()) {
        throw TrainingError("training traces yield no full entropy windows");
    }

    BaselineProfile profile;
    for (const auto& [key, a] : accum) {
        if (a.n < kMinTrainingWindows) {
            throw TrainingError("field " + to_string(key) + " has only " +
                                std::to_string(a.n) + " training windows, need " +
                                std::to_string(kMinTrainingWindows));
        }
        BaselineBand band;
        band.min_entropy = a.min;
        band.max_entropy = a.max;
        band.mean_entropy = a.sum / static_cast<double>(a.n);
        band.window_size = window_size;
        band.windows_observed = a.n;
        profile.set(key, band);
    }
    return profile;
}

DetectionReport detect(const Trace& trace, const BaselineProfile& profile, double margin,
                       std::size_t flag_threshold) {
    if (margin < 0.0) {
        throw std::invalid_argument("margin must be >= 0");
    }
    if (flag_threshold == 0) {
        throw std::invalid_argument("flag threshold must be >= 1");
    }
    DetectionReport report;
    for (const auto& [key, band] : profile.bands()) {
        const auto symbols = symbol_stream(trace, key.proto, key.field, key.sym);
        if (symbols.empty()) {
            throw ConfigError("profile monitors " + to_string(key) +
                              " but the trace has no such field");
        }
        if (symbols.size() < band.window_size) {
            throw std::domain_error("trace too short for one " +
                                    std::to_string(band.window_size) + "-sample window of " +
                                    to_string(key));
        }
        FieldVerdict fv;
        fv.key = key;
        fv.band = band;
        const auto series = window_entropies(symbols, band.window_size);
        for (std::size_t w = 0; w < series.size(); ++w) {
            WindowVerdict wv;
            wv.window_index = w;
            wv.entropy = series[w];
            wv.flagged = series[w] < band.min_entropy - margin ||
                         series[w] > band.max_entropy + margin;
            if (wv.flagged) {
                ++fv.flagged_count;
                report.flagged_windows.emplace_back(key, w);
            }
            fv.windows.push_back(wv);
        }
        report.fields.push_back(std::move(fv));
    }
    report.verdict = Verdict::Clean;
    for (const auto& fv : report.fields) {
        if (fv.flagged_count >= flag_threshold) {
            report.verdict = Verdict::Suspicious;
            break;
        }
    }
    return report;
}

} // namespace covertlab
