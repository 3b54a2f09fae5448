#pragma once

/**
 * trace — synthetic traces, the line-oriented trace file format, and the
 * seeded generator for legitimate background traffic.
 *
 * File format (text, space-delimited):
 *   covertlab-trace v1 <count>
 *   <index> <proto> field=value field=value ... [covert=0|1]
 *
 * parse(render(trace)) == trace, exactly.
 */

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "covertlab/header_model.hpp"

namespace covertlab {

using Trace = std::vector<PacketRecord>;

// Deterministic 64-bit generator (splitmix64). Field-value sampling must be
// reproducible across standard libraries, so no <random> distributions.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next();

    // Uniform in [lo, hi], inclusive.
    std::uint32_t uniform(std::uint32_t lo, std::uint32_t hi);

    // Uniform in [0, 1).
    double unit();

    // Derives an independent stream for a sub-purpose.
    Rng fork(std::uint64_t salt);

private:
    std::uint64_t state_;
};

// Generates n_packets of legitimate traffic, cycling deterministically
// through the protocol mix. Every packet passes validate_packet; TCP
// timestamps are strictly ascending with jittered parity; ESP sequence
// numbers count up monotonically.
Trace gen_legit_trace(std::size_t n_packets, const std::vector<ProtocolKind>& mix,
                      std::uint64_t seed);

std::string render_trace(const Trace& trace);
Trace parse_trace(std::istream& input);

void write_trace(const Trace& trace, const std::string& path);
Trace read_trace(const std::string& path);

} // namespace covertlab
