#pragma once

/**
 * metrics — Shannon entropy, minimum code bits, covertness indices, channel
 * capacity, C/E ratio and the robustness predicate.
 *
 * Entropy uses the standard -sum(p * log2 p) over the empirical symbol
 * distribution, with exact rational frequencies.
 */

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace covertlab {

struct EntropyReport {
    double entropy_bits = 0.0;      // bits per symbol
    std::size_t symbol_count = 0;
    std::size_t distinct_symbols = 0;
    std::size_t total_code_bits = 0; // ceil(log2(distinct)) * length
};

enum class Detectability { Detectable, LikelyDetectable, NotDetectable };

std::string_view to_string(Detectability d);

struct CovertnessReport {
    double eta = 0.0;
    Detectability classification = Detectability::Detectable;
    double capacity = 0.0;
    double ce_ratio = 0.0;
    bool robust = false;
};

// -sum p_i log2 p_i over the empirical distribution. Throws
// std::domain_error on an empty sequence.
double shannon_entropy(std::span<const std::uint64_t> symbols);
double shannon_entropy(std::string_view symbols);

// Total bits to represent the sequence at ceil(log2(distinct)) bits per
// symbol; a single-symbol alphabet still costs one bit per symbol.
std::size_t min_code_bits(std::span<const std::uint64_t> symbols);
std::size_t min_code_bits(std::string_view symbols);

EntropyReport entropy_report(std::span<const std::uint64_t> symbols);
EntropyReport entropy_report(std::string_view symbols);

// Covertness index of a network covert channel: t_set / t_max.
double covertness_ncc(std::size_t t_set, std::size_t t_max);

// Covertness index of a subliminal channel:
// (rounds_used / rounds_max) * (t_set / t_max).
double covertness_subliminal(std::size_t rounds_used, std::size_t rounds_max,
                             std::size_t t_set, std::size_t t_max);

// log2(1 + field_bits / message_bits), evaluated literally.
double channel_capacity(unsigned field_bits, unsigned message_bits);

// (capacity * t) / entropy; linear in the trapdoor count t.
double ce_ratio(double capacity, std::size_t t, double entropy);

// Maps a continuous index to the detectability regions split at 0.5.
Detectability classify_covertness(double eta);

// robust iff ce_ratio(capacity, t, entropy) < entropy and eta > 0.5.
CovertnessReport robustness(double eta, double capacity, std::size_t t, double entropy);

// true iff the message's total code bits fit strictly inside the field.
bool embed_feasible(std::size_t message_total_bits, unsigned field_bits);

} // namespace covertlab
