#include "covertlab/metrics.hpp"

#include <bit>
#include <cmath>
#include <stdexcept>
#include <unordered_map>

namespace covertlab {

std::string_view to_string(Detectability d) {
    switch (d) {
        case Detectability::Detectable: return "detectable";
        case Detectability::LikelyDetectable: return "likely-detectable";
        case Detectability::NotDetectable: return "not-detectable";
    }
    return "?";
}

namespace {

std::unordered_map<std::uint64_t, std::size_t> histogram(
    std::span<const std::uint64_t> symbols) {
    std::unordered_map<std::uint64_t, std::size_t> counts;
    counts.reserve(symbols.size());
    for (std::uint64_t s : symbols) {
        ++counts[s];
    }
    return counts;
}

double entropy_of_counts(const std::unordered_map<std::uint64_t, std::size_t>& counts,
                         std::size_t total) {
    double h = 0.0;
    for (const auto& [symbol, count] : counts) {
        (void)symbol;
        const double p = static_cast<double>(count) / static_cast<double>(total);
        h -= p * std::log2(p);
    }
    return h < 0.0 ? 0.0 : h; // constant sequences give -0.0
}

std::size_t code_bits(std::size_t distinct, std::size_t length) {
    const std::size_t per_symbol =
        distinct <= 1 ? 1 : static_cast<std::size_t>(std::bit_width(distinct - 1));
    return per_symbol * length;
}

std::vector<std::uint64_t> widen(std::string_view s) {
    std::vector<std::uint64_t> symbols;
    symbols.reserve(s.size());
    for (unsigned char c : s) {
        symbols.push_back(c);
    }
    return symbols;
}

} // namespace

double shannon_entropy(std::span<const std::uint64_t> symbols) {
    if (symbols.empty()) {
        throw std::domain_error("entropy of an empty sequence is undefined");
    }
    return entropy_of_counts(histogram(symbols), symbols.size());
}

double shannon_entropy(std::string_view symbols) {
    const auto wide = widen(symbols);
    return shannon_entropy(std::span<const std::uint64_t>(wide));
}

std::size_t min_code_bits(std::span<const std::uint64_t> symbols) {
    if (symbols.empty()) {
        throw std::domain_error("code bits of an empty sequence is undefined");
    }
    return code_bits(histogram(symbols).size(), symbols.size());
}

std::size_t min_code_bits(std::string_view symbols) {
    const auto wide = widen(symbols);
    return min_code_bits(std::span<const std::uint64_t>(wide));
}

EntropyReport entropy_report(std::span<const std::uint64_t> symbols) {
    if (symbols.empty()) {
        throw std::domain_error("entropy report of an empty sequence is undefined");
    }
    const auto counts = histogram(symbols);
    EntropyReport report;
    report.entropy_bits = entropy_of_counts(counts, symbols.size());
    report.symbol_count = symbols.size();
    report.distinct_symbols = counts.size();
    report.total_code_bits = code_bits(counts.size(), symbols.size());
    return report;
}

EntropyReport entropy_report(std::string_view symbols) {
    const auto wide = widen(symbols);
    return entropy_report(std::span<const std::uint64_t>(wide));
}

double covertness_ncc(std::size_t t_set, std::size_t t_max) {
    if (t_max == 0) {
        throw std::domain_error("t_max must be >= 1");
    }
    if (t_set > t_max) {
        throw std::domain_error("t_set exceeds t_max");
    }
    return static_cast<double>(t_set) / static_cast<double>(t_max);
}

double covertness_subliminal(std::size_t rounds_used, std::size_t rounds_max,
                             std::size_t t_set, std::size_t t_max) {
    if (rounds_max == 0) {
        throw std::domain_error("rounds_max must be >= 1");
    }
    if (rounds_used > rounds_max) {
        throw std::domain_error("rounds_used exceeds rounds_max");
    }
    return (static_cast<double>(rounds_used) / static_cast<double>(rounds_max)) *
           covertness_ncc(t_set, t_max);
}

double channel_capacity(unsigned field_bits, unsigned message_bits) {
    if (message_bits == 0) {
        throw std::domain_error("message_bits must be >= 1");
    }
    return std::log2(1.0 + static_cast<double>(field_bits) /
                               static_cast<double>(message_bits));
}

double ce_ratio(double capacity, std::size_t t, double entropy) {
    if (entropy <= 0.0) {
        throw std::domain_error("entropy must be positive");
    }
    if (t == 0) {
        throw std::domain_error("trapdoor count must be >= 1");
    }
    return capacity * static_cast<double>(t) / entropy;
}

Detectability classify_covertness(double eta) {
    if (eta < 0.5) return Detectability::Detectable;
    if (eta > 0.5) return Detectability::NotDetectable;
    return Detectability::LikelyDetectable;
}

CovertnessReport robustness(double eta, double capacity, std::size_t t, double entropy) {
    CovertnessReport report;
    report.eta = eta;
    report.classification = classify_covertness(eta);
    report.capacity = capacity;
    report.ce_ratio = ce_ratio(capacity, t, entropy);
    report.robust = report.ce_ratio < entropy && eta > 0.5;
    return report;
}

bool embed_feasible(std::size_t message_total_bits, unsigned field_bits) {
    return message_total_bits < field_bits;
}

} // namespace covertlab
