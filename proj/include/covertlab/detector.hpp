#pragma once

/**
 * detector — entropy-based detection of trapdoor activity.
 *
 * Field values are reduced to symbols (low byte, high byte, or LSB — the
 * detector-side mirrors of the encoding schemes), windowed entropy is
 * computed over non-overlapping windows, and a trace is flagged when enough
 * windows fall outside the entropy band learned from legitimate traffic.
 *
 * The detector never reads covert_marker; that label exists only so test
 * traces carry their own ground truth.
 */

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "covertlab/header_model.hpp"
#include "covertlab/trace.hpp"

namespace covertlab {

enum class Symbolizer { LowByte, HighByte, Lsb };

std::string_view to_string(Symbolizer sym);
std::optional<Symbolizer> symbolizer_from_string(std::string_view token);

std::uint64_t apply_symbolizer(std::uint32_t value, Symbolizer sym);

// Symbolizers the detector runs on a trapdoor-capable field by default.
// Each scheme's target field gets the view that mirrors its decode:
// identification -> LowByte, TCP sequence_number -> HighByte,
// options_timestamp -> Lsb, ESP sequence_number/padding -> LowByte.
std::vector<Symbolizer> default_symbolizers(ProtocolKind proto, const std::string& field);

struct MonitorKey {
    ProtocolKind proto = ProtocolKind::IPv4;
    std::string field;
    Symbolizer sym = Symbolizer::LowByte;

    auto operator<=>(const MonitorKey&) const = default;
};

std::string to_string(const MonitorKey& key);

struct BaselineBand {
    double min_entropy = 0.0;
    double mean_entropy = 0.0;
    double max_entropy = 0.0;
    std::size_t window_size = 0;
    std::size_t windows_observed = 0;
};

inline constexpr std::size_t kDefaultWindowSize = 256;
inline constexpr std::size_t kMinWindowSize = 16;
inline constexpr std::size_t kMinTrainingWindows = 10;
inline constexpr double kDefaultMargin = 0.25;
inline constexpr std::size_t kDefaultFlagThreshold = 2;

class BaselineProfile {
public:
    const std::map<MonitorKey, BaselineBand>& bands() const { return bands_; }
    void set(const MonitorKey& key, const BaselineBand& band);

    // One line per monitored key:
    //   proto field symbolizer min mean max window_size
    // with six decimal places on the entropy values.
    std::string serialize() const;
    static BaselineProfile parse(std::istream& input);

    void save(const std::string& path) const;
    static BaselineProfile load(const std::string& path);

private:
    std::map<MonitorKey, BaselineBand> bands_;
};

// Windowed entropy of a symbolized field over packets of one protocol
// (non-overlapping windows, partial tail discarded). Throws
// std::domain_error when the trace holds less than one full window.
std::vector<double> field_entropy_series(const Trace& trace, ProtocolKind proto,
                                         const std::string& field, Symbolizer sym,
                                         std::size_t window_size);

// Learns min/mean/max window entropy per (proto, field, symbolizer) over
// the training traces, using default_symbolizers for every trapdoor-capable
// field present. Windows never span traces. Throws TrainingError when a
// monitored field has fewer than kMinTrainingWindows windows combined.
BaselineProfile build_baseline(const std::vector<Trace>& legit_traces,
                               std::size_t window_size = kDefaultWindowSize);

struct WindowVerdict {
    std::size_t window_index = 0;
    double entropy = 0.0;
    bool flagged = false;
};

enum class Verdict { Clean, Suspicious };

std::string_view to_string(Verdict v);

struct FieldVerdict {
    MonitorKey key;
    BaselineBand band;
    std::vector<WindowVerdict> windows;
    std::size_t flagged_count = 0;
};

struct DetectionReport {
    std::vector<FieldVerdict> fields;
    std::vector<std::pair<MonitorKey, std::size_t>> flagged_windows;
    Verdict verdict = Verdict::Clean;
};

// Flags a window when its entropy leaves [min - margin, max + margin]; the
// trace is Suspicious when any single monitored field collects at least
// flag_threshold flagged windows. Throws ConfigError when the trace has no
// packets for a monitored field.
DetectionReport detect(const Trace& trace, const BaselineProfile& profile,
                       double margin = kDefaultMargin,
                       std::size_t flag_threshold = kDefaultFlagThreshold);

} // namespace covertlab
