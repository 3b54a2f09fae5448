#pragma once

/**
 * covert_schemes — the reversible encoding schemes that hide payload octets
 * in header field values.
 *
 *   IpIdModulus   — IPv4 identification; value chosen so (R - 1) mod n = c.
 *   SeqScale      — TCP sequence number; c selects a 2^24-wide bucket.
 *   TimestampLsb  — TCP timestamp option; payload bits carried in LSBs.
 *   EspSubliminal — ESP sequence-number low byte and padding byte, alternating.
 *
 * All decodes are pure functions of the received value; the encoder's free
 * carrier choice (k, offset) never has to be communicated.
 */

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "covertlab/header_model.hpp"

namespace covertlab {

using CovertPayload = std::vector<std::uint8_t>;

enum class SchemeId { IpIdModulus, SeqScale, TimestampLsb, EspSubliminal };

std::string_view to_string(SchemeId scheme);
std::optional<SchemeId> scheme_from_string(std::string_view token);

// Character-set size for the modulus scheme. 256 = full octet alphabet.
inline constexpr unsigned kAsciiAlphabet = 256;

// Bucket width of the sequence-number scheme: the 32-bit space divided into
// 256 equal buckets of 2^24 values each.
inline constexpr std::uint32_t kSeqBucket = 1u << 24;

// ---- Scheme 1: IP ID modulus ----

// Largest carrier choice k such that c + 1 + alphabet*k still fits 16 bits.
unsigned scheme1_max_k(std::uint8_t c, unsigned alphabet = kAsciiAlphabet);

// R = c + 1 + alphabet*k. Throws std::out_of_range when R >= 2^16.
std::uint16_t scheme1_encode(std::uint8_t c, unsigned k,
                             unsigned alphabet = kAsciiAlphabet);

// (ip_id - 1) mod alphabet, with the non-negative modulus convention:
// ip_id = 0 decodes to alphabet - 1.
std::uint8_t scheme1_decode(std::uint16_t ip_id, unsigned alphabet = kAsciiAlphabet);

// The carrier choice k is free; this draws it from a seeded generator.
class Rng;
std::uint16_t scheme1_encode_seeded(std::uint8_t c, Rng& rng);

// ---- Scheme 2: sequence-number scaling ----

// c*2^24 + offset. Throws std::out_of_range when offset >= 2^24.
std::uint32_t scheme2_encode(std::uint8_t c, std::uint32_t offset);

// Draws the free in-bucket offset from a seeded generator.
std::uint32_t scheme2_encode_seeded(std::uint8_t c, Rng& rng);

// floor(seq / 2^24); total over the 32-bit space.
std::uint8_t scheme2_decode(std::uint32_t seq);

// ---- Scheme 3: timestamp LSB ----

// The 8 bits of c, least-significant first.
std::array<std::uint8_t, 8> scheme3_bits(std::uint8_t c);

// Adjusts a strictly ascending timestamp sequence so the LSBs of the first
// 8*|payload| entries spell the payload (LSB-first per byte). Models the
// sender delaying a segment until the timestamp parity matches: a mismatched
// timestamp is bumped by one tick and the bump propagates forward as needed
// to keep the sequence strictly ascending. Trailing entries are passed
// through otherwise unchanged.
//
// Throws CapacityError when the sequence is shorter than 8*|payload| and
// std::invalid_argument when the input is not strictly ascending.
std::vector<std::uint32_t> scheme3_encode_stream(
    const CovertPayload& payload, std::span<const std::uint32_t> base_timestamps);

// Reassembles n_bytes from the LSBs of the first 8*n_bytes timestamps.
CovertPayload scheme3_decode_stream(std::span<const std::uint32_t> timestamps,
                                    std::size_t n_bytes);

// ---- ESP subliminal trapdoors ----

// Writes payload bytes alternately into the low byte of sequence_number and
// the padding field of successive ESP packets (two bytes per packet, upper
// sequence-number bytes preserved). Throws CapacityError when the packet
// run is too short and ConfigError on a non-ESP packet.
std::vector<PacketRecord> esp_subliminal_embed(const CovertPayload& payload,
                                               std::vector<PacketRecord> packets);

CovertPayload esp_subliminal_extract(std::span<const PacketRecord> packets,
                                     std::size_t n_bytes);

} // namespace covertlab
