#include "covertlab/covert_schemes.hpp"

#include <stdexcept>
#include <string>

#include "covertlab/trace.hpp"

namespace covertlab {

std::string_view to_string(SchemeId scheme) {
    switch (scheme) {
        case SchemeId::IpIdModulus: return "ipid_modulus";
        case SchemeId::SeqScale: return "seq_scale";
        case SchemeId::TimestampLsb: return "timestamp_lsb";
        case SchemeId::EspSubliminal: return "esp_subliminal";
    }
    return "?";
}

std::optional<SchemeId> scheme_from_string(std::string_view token) {
    if (token == "ipid_modulus") return SchemeId::IpIdModulus;
    if (token == "seq_scale") return SchemeId::SeqScale;
    if (token == "timestamp_lsb") return SchemeId::TimestampLsb;
    if (token == "esp_subliminal") return SchemeId::EspSubliminal;
    return std::nullopt;
}

static void check_alphabet(unsigned alphabet) {
    if (alphabet < 2) {
        throw std::domain_error("alphabet size must be >= 2");
    }
}

unsigned scheme1_max_k(std::uint8_t c, unsigned alphabet) {
    check_alphabet(alphabet);
    return (65535u - (static_cast<unsigned>(c) + 1u)) / alphabet;
}

std::uint16_t scheme1_encode(std::uint8_t c, unsigned k, unsigned alphabet) {
    check_alphabet(alphabet);
    const std::uint64_t r = static_cast<std::uint64_t>(c) + 1u +
                            static_cast<std::uint64_t>(alphabet) * k;
    if (r > 0xFFFFu) {
        throw std::out_of_range("carrier choice k=" + std::to_string(k) +
                                " pushes IP ID to " + std::to_string(r) +
                                ", beyond 16 bits");
    }
    return static_cast<std::uint16_t>(r);
}

std::uint8_t scheme1_decode(std::uint16_t ip_id, unsigned alphabet) {
    check_alphabet(alphabet);
    // Non-negative modulus: ip_id = 0 maps to alphabet - 1, not -1.
    const unsigned shifted = (static_cast<unsigned>(ip_id) + alphabet - 1u) % alphabet;
    return static_cast<std::uint8_t>(shifted);
}

std::uint16_t scheme1_encode_seeded(std::uint8_t c, Rng& rng) {
    return scheme1_encode(c, rng.uniform(0, scheme1_max_k(c)));
}

std::uint32_t scheme2_encode(std::uint8_t c, std::uint32_t offset) {
    if (offset >= kSeqBucket) {
        throw std::out_of_range("bucket offset " + std::to_string(offset) +
                                " exceeds 2^24 - 1");
    }
    return (static_cast<std::uint32_t>(c) << 24) | offset;
}

std::uint8_t scheme2_decode(std::uint32_t seq) {
    return static_cast<std::uint8_t>(seq >> 24);
}

std::uint32_t scheme2_encode_seeded(std::uint8_t c, Rng& rng) {
    return scheme2_encode(c, rng.uniform(0, kSeqBucket - 1));
}

std::array<std::uint8_t, 8> scheme3_bits(std::uint8_t c) {
    std::array<std::uint8_t, 8> bits{};
    for (unsigned i = 0; i < 8; ++i) {
        bits[i] = static_cast<std::uint8_t>((c >> i) & 1u);
    }
    return bits;
}

std::vector<std::uint32_t> scheme3_encode_stream(
    const CovertPayload& payload, std::span<const std::uint32_t> base_timestamps) {
    for (std::size_t i = 1; i < base_timestamps.size(); ++i) {
        if (base_timestamps[i] <= base_timestamps[i - 1]) {
            throw std::invalid_argument("base timestamps must be strictly ascending");
        }
    }
    const std::size_t covert_bits = payload.size() * 8;
    if (base_timestamps.size() < covert_bits) {
        throw CapacityError("timestamp stream carries " +
                            std::to_string(base_timestamps.size()) + " bits, payload needs " +
                            std::to_string(covert_bits));
    }

    std::vector<std::uint32_t> out(base_timestamps.begin(), base_timestamps.end());
    std::uint64_t prev = 0;
    bool have_prev = false;
    for (std::size_t i = 0; i < out.size(); ++i) {
        std::uint64_t t = out[i];
        if (have_prev && t <= prev) {
            t = prev + 1;
        }
        if (i < covert_bits) {
            const std::uint8_t bit = (payload[i / 8] >> (i % 8)) & 1u;
            if ((t & 1u) != bit) {
                t += 1;
            }
        }
        out[i] = static_cast<std::uint32_t>(t);
        prev = t;
        have_prev = true;
    }
    return out;
}

CovertPayload scheme3_decode_stream(std::span<const std::uint32_t> timestamps,
                                    std::size_t n_bytes) {
    if (timestamps.size() < n_bytes * 8) {
        throw CapacityError("timestamp stream has " + std::to_string(timestamps.size()) +
                            " entries, need " + std::to_string(n_bytes * 8));
    }
    CovertPayload payload(n_bytes, 0);
    for (std::size_t i = 0; i < n_bytes * 8; ++i) {
        payload[i / 8] |= static_cast<std::uint8_t>((timestamps[i] & 1u) << (i % 8));
    }
    return payload;
}

std::vector<PacketRecord> esp_subliminal_embed(const CovertPayload& payload,
                                               std::vector<PacketRecord> packets) {
    const std::size_t needed = (payload.size() + 1) / 2;
    if (packets.size() < needed) {
        throw CapacityError("ESP run of " + std::to_string(packets.size()) +
                            " packets carries " + std::to_string(packets.size() * 2) +
                            " bytes, payload needs " + std::to_string(payload.size()));
    }
    for (std::size_t i = 0; i < payload.size(); ++i) {
        PacketRecord& pkt = packets[i / 2];
        if (pkt.proto != ProtocolKind::IPSecESP) {
            throw ConfigError("esp_subliminal_embed applied to a non-ESP packet");
        }
        if (i % 2 == 0) {
            std::uint32_t& seq = pkt.fields["sequence_number"];
            seq = (seq & 0xFFFFFF00u) | payload[i];
        } else {
            pkt.fields["padding"] = payload[i];
        }
    }
    return packets;
}

CovertPayload esp_subliminal_extract(std::span<const PacketRecord> packets,
                                     std::size_t n_bytes) {
    const std::size_t needed = (n_bytes + 1) / 2;
    if (packets.size() < needed) {
        throw CapacityError("ESP run of " + std::to_string(packets.size()) +
                            " packets holds " + std::to_string(packets.size() * 2) +
                            " bytes, requested " + std::to_string(n_bytes));
    }
    CovertPayload payload;
    payload.reserve(n_bytes);
    for (std::size_t i = 0; i < n_bytes; ++i) {
        const PacketRecord& pkt = packets[i / 2];
        if (i % 2 == 0) {
            payload.push_back(static_cast<std::uint8_t>(pkt.fields.at("sequence_number") & 0xFFu));
        } else {
            payload.push_back(static_cast<std::uint8_t>(pkt.fields.at("padding") & 0xFFu));
        }
    }
    return payload;
}

} // namespace covertlab
