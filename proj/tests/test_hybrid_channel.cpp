#include <doctest.h>

#include <random>
#include <set>

#include "covertlab/hybrid_channel.hpp"
#include "test_helpers.hpp"

using namespace covertlab;
using namespace covertlab::testing;

namespace {

const TrapdoorSpec kIpId{ProtocolKind::IPv4, "identification", SchemeId::IpIdModulus};
const TrapdoorSpec kSeq{ProtocolKind::TCP, "sequence_number", SchemeId::SeqScale};
const TrapdoorSpec kTs{ProtocolKind::TCP, "options_timestamp", SchemeId::TimestampLsb};
const TrapdoorSpec kEsp{ProtocolKind::IPSecESP, "sequence_number", SchemeId::EspSubliminal};

const std::vector<ProtocolKind> kAllProtocols{ProtocolKind::IPv4, ProtocolKind::TCP,
                                              ProtocolKind::IPSecESP};

CovertPayload bytes_of(const std::string& s) {
    return CovertPayload(s.begin(), s.end());
}

Trace strip_markers(Trace trace) {
    for (auto& pkt : trace) {
        pkt.covert_marker.reset();
    }
    return trace;
}

// Fields a config is allowed to touch, per packet protocol.
std::set<std::string> touched_fields(const HybridChannelConfig& config, ProtocolKind proto) {
    std::set<std::string> fields;
    for (const auto& spec : config.trapdoors) {
        if (spec.proto != proto) continue;
        for (const auto& f : scheme_field_family(spec.scheme)) {
            fields.insert(f);
        }
    }
    return fields;
}

void check_non_interference(const Trace& before, const Trace& after,
                            const HybridChannelConfig& config) {
    REQUIRE(before.size() == after.size());
    for (std::size_t i = 0; i < before.size(); ++i) {
        CHECK(before[i].index == after[i].index);
        CHECK(before[i].proto == after[i].proto);
        const auto allowed = touched_fields(config, before[i].proto);
        REQUIRE(before[i].fields.size() == after[i].fields.size());
        for (const auto& [name, value] : before[i].fields) {
            if (!allowed.count(name)) {
                CHECK(after[i].fields.at(name) == value);
            }
        }
    }
}

} // namespace

TEST_CASE("trapdoor spec tokens round-trip") {
    for (const auto& spec : {kIpId, kSeq, kTs, kEsp}) {
        CHECK(trapdoor_from_string(to_string(spec)) == spec);
    }
    CHECK_THROWS_AS(trapdoor_from_string("tcp:sequence_number"), ConfigError);
    CHECK_THROWS_AS(trapdoor_from_string("smtp:x:seq_scale"), ConfigError);
    CHECK_THROWS_AS(trapdoor_from_string("tcp:x:unknown_scheme"), ConfigError);
}

TEST_CASE("hybrid 'IM' lands 'I' in the first TCP bucket and 'M' in the first IP ID") {
    const auto trace = gen_legit_trace(12, {ProtocolKind::IPv4, ProtocolKind::TCP}, 77);
    const HybridChannelConfig config{{kSeq, kIpId}, "im"};
    const auto result = embed_hybrid(trace, config, bytes_of("IM"));

    const auto& first_tcp = result.trace[1];
    const auto& first_ipv4 = result.trace[0];
    CHECK(scheme2_decode(first_tcp.fields.at("sequence_number")) == 73);  // 'I'
    CHECK(scheme1_decode(static_cast<std::uint16_t>(
              first_ipv4.fields.at("identification"))) == 77);            // 'M'
    CHECK(extract_hybrid(result.trace, config, 2) == bytes_of("IM"));
    check_non_interference(trace, result.trace, config);
}

TEST_CASE("empty payload leaves the trace untouched") {
    const auto trace = gen_legit_trace(10, kAllProtocols, 3);
    const HybridChannelConfig config{{kIpId, kSeq, kTs, kEsp}, ""};
    const auto result = embed_hybrid(trace, config, {});
    CHECK(result.trace == trace);
    CHECK(result.consumed.empty());
    CHECK(extract_hybrid(trace, config, 0).empty());
}

TEST_CASE("single-trapdoor configs degenerate to the plain schemes") {
    const auto trace = gen_legit_trace(240, kAllProtocols, 9);
    const auto payload = bytes_of("covert");

    SUBCASE("sequence scaling matches per-packet scheme2 with the carrier offset") {
        const auto result = embed_hybrid(trace, HybridChannelConfig{{kSeq}, ""}, payload);
        std::size_t byte_idx = 0;
        for (std::size_t i = 0; i < trace.size() && byte_idx < payload.size(); ++i) {
            if (trace[i].proto != ProtocolKind::TCP) continue;
            const auto original = trace[i].fields.at("sequence_number");
            CHECK(result.trace[i].fields.at("sequence_number") ==
                  scheme2_encode(payload[byte_idx], original & 0x00FFFFFFu));
            ++byte_idx;
        }
        CHECK(byte_idx == payload.size());
        CHECK(extract_hybrid(result.trace, HybridChannelConfig{{kSeq}, ""}, payload.size()) ==
              payload);
    }

    SUBCASE("IP ID modulus matches per-packet scheme1 with the carrier-derived k") {
        const auto result = embed_hybrid(trace, HybridChannelConfig{{kIpId}, ""}, payload);
        std::size_t byte_idx = 0;
        for (std::size_t i = 0; i < trace.size() && byte_idx < payload.size(); ++i) {
            if (trace[i].proto != ProtocolKind::IPv4) continue;
            const auto original = trace[i].fields.at("identification");
            const unsigned k = std::min(original >> 8, scheme1_max_k(payload[byte_idx]));
            CHECK(result.trace[i].fields.at("identification") ==
                  scheme1_encode(payload[byte_idx], k));
            ++byte_idx;
        }
        CHECK(byte_idx == payload.size());
    }

    SUBCASE("timestamp LSB matches scheme3 over the TCP timestamp stream") {
        const auto result = embed_hybrid(trace, HybridChannelConfig{{kTs}, ""}, payload);
        std::vector<std::uint32_t> base;
        for (const auto& pkt : trace) {
            if (pkt.proto == ProtocolKind::TCP) {
                base.push_back(pkt.fields.at("options_timestamp"));
            }
        }
        const auto expected = scheme3_encode_stream(payload, base);
        std::size_t tcp_idx = 0;
        for (std::size_t i = 0; i < trace.size(); ++i) {
            if (trace[i].proto != ProtocolKind::TCP) continue;
            CHECK(result.trace[i].fields.at("options_timestamp") == expected[tcp_idx]);
            ++tcp_idx;
        }
        CHECK(result.consumed.size() == payload.size() * 8);
    }

    SUBCASE("ESP subliminal matches the two-trapdoor scheme") {
        const auto result = embed_hybrid(trace, HybridChannelConfig{{kEsp}, ""}, payload);
        std::vector<PacketRecord> esp_before;
        for (const auto& pkt : trace) {
            if (pkt.proto == ProtocolKind::IPSecESP) esp_before.push_back(pkt);
        }
        const auto expected = esp_subliminal_embed(payload, esp_before);
        std::size_t esp_idx = 0;
        for (std::size_t i = 0; i < trace.size(); ++i) {
            if (trace[i].proto != ProtocolKind::IPSecESP) continue;
            CHECK(result.trace[i] == expected[esp_idx]);
            ++esp_idx;
        }
    }
}

TEST_CASE("trapdoor slack per protocol") {
    SUBCASE("one of four IPv4 trapdoors leaves a slack of three") {
        const auto slack = trapdoor_slack(HybridChannelConfig{{kIpId}, ""});
        CHECK(slack.at(ProtocolKind::IPv4) == 3);
    }
    SUBCASE("three of seven TCP trapdoors leave a slack of four") {
        const HybridChannelConfig config{
            {kSeq, kTs, {ProtocolKind::TCP, "window", SchemeId::SeqScale}}, ""};
        const auto slack = trapdoor_slack(config);
        CHECK(slack.at(ProtocolKind::TCP) == 4);
    }
    SUBCASE("saturating a protocol is a constraint violation naming it") {
        const HybridChannelConfig config{
            {{ProtocolKind::IPv4, "identification", SchemeId::IpIdModulus},
             {ProtocolKind::IPv4, "tos", SchemeId::IpIdModulus},
             {ProtocolKind::IPv4, "flags_frag", SchemeId::IpIdModulus},
             {ProtocolKind::IPv4, "options", SchemeId::IpIdModulus}},
            ""};
        try {
            trapdoor_slack(config);
            FAIL("expected ConstraintError");
        } catch (const ConstraintError& e) {
            CHECK(std::string(e.what()).find("ipv4") != std::string::npos);
        }
    }
    SUBCASE("two ESP trapdoors saturate T_m = 2") {
        const HybridChannelConfig config{
            {kEsp, {ProtocolKind::IPSecESP, "padding", SchemeId::EspSubliminal}}, ""};
        CHECK_THROWS_AS(trapdoor_slack(config), ConstraintError);
    }
    SUBCASE("non-capable fields are config errors") {
        CHECK_THROWS_AS(
            trapdoor_slack(HybridChannelConfig{
                {{ProtocolKind::IPv4, "ttl", SchemeId::IpIdModulus}}, ""}),
            ConfigError);
        CHECK_THROWS_AS(trapdoor_slack(HybridChannelConfig{{}, ""}), ConfigError);
    }
}

TEST_CASE("embed validates the config before touching the trace") {
    const auto trace = gen_legit_trace(32, kAllProtocols, 5);
    SUBCASE("scheme/field binding is enforced") {
        const HybridChannelConfig config{
            {{ProtocolKind::TCP, "window", SchemeId::SeqScale}}, ""};
        CHECK_THROWS_AS(embed_hybrid(trace, config, bytes_of("x")), ConfigError);
    }
    SUBCASE("saturated protocols are constraint errors") {
        const HybridChannelConfig config{
            {{ProtocolKind::IPv4, "identification", SchemeId::IpIdModulus},
             {ProtocolKind::IPv4, "tos", SchemeId::IpIdModulus},
             {ProtocolKind::IPv4, "flags_frag", SchemeId::IpIdModulus},
             {ProtocolKind::IPv4, "options", SchemeId::IpIdModulus}},
            ""};
        CHECK_THROWS_AS(embed_hybrid(trace, config, bytes_of("x")), ConstraintError);
    }
    SUBCASE("duplicate trapdoors are config errors") {
        const HybridChannelConfig config{{kSeq, kSeq}, ""};
        CHECK_THROWS_AS(embed_hybrid(trace, config, bytes_of("x")), ConfigError);
    }
    SUBCASE("empty configs are config errors") {
        CHECK_THROWS_AS(embed_hybrid(trace, HybridChannelConfig{}, {}), ConfigError);
    }
}

TEST_CASE("capacity accounting is exact per scheme") {
    SUBCASE("one IPv4 packet per byte") {
        const auto exact = gen_legit_trace(5, {ProtocolKind::IPv4}, 1);
        const auto short_by_one = gen_legit_trace(4, {ProtocolKind::IPv4}, 1);
        const HybridChannelConfig config{{kIpId}, ""};
        CHECK(channel_capacity_bytes(exact, config) == 5);
        const auto result = embed_hybrid(exact, config, bytes_of("fiver"));
        CHECK(result.consumed_per_trapdoor[0] == 5);
        CHECK_THROWS_AS(embed_hybrid(short_by_one, config, bytes_of("fiver")), CapacityError);
    }
    SUBCASE("eight TCP packets per timestamp byte") {
        const auto exact = gen_legit_trace(24, {ProtocolKind::TCP}, 2);
        const auto short_by_one = gen_legit_trace(23, {ProtocolKind::TCP}, 2);
        const HybridChannelConfig config{{kTs}, ""};
        CHECK(channel_capacity_bytes(exact, config) == 3);
        const auto result = embed_hybrid(exact, config, bytes_of("abc"));
        CHECK(result.consumed_per_trapdoor[0] == 24);
        CHECK_THROWS_AS(embed_hybrid(short_by_one, config, bytes_of("abc")), CapacityError);
        CHECK_THROWS_AS(extract_hybrid(short_by_one, config, 3), CapacityError);
    }
    SUBCASE("two bytes per ESP packet") {
        const auto exact = gen_legit_trace(3, {ProtocolKind::IPSecESP}, 3);
        const auto short_by_one = gen_legit_trace(2, {ProtocolKind::IPSecESP}, 3);
        const HybridChannelConfig config{{kEsp}, ""};
        CHECK(channel_capacity_bytes(exact, config) == 6);
        const auto result = embed_hybrid(exact, config, bytes_of("fives"));
        CHECK(result.consumed_per_trapdoor[0] == 3);
        CHECK_THROWS_AS(embed_hybrid(short_by_one, config, bytes_of("fives")), CapacityError);
    }
    SUBCASE("capacity errors name the starved trapdoor") {
        const auto trace = gen_legit_trace(4, {ProtocolKind::IPv4}, 4);
        try {
            embed_hybrid(trace, HybridChannelConfig{{kIpId}, ""}, bytes_of("too long"));
            FAIL("expected CapacityError");
        } catch (const CapacityError& e) {
            CHECK(std::string(e.what()).find("ipv4:identification:ipid_modulus") !=
                  std::string::npos);
        }
    }
}

TEST_CASE("embed consumes exactly the boundary capacity under round-robin") {
    std::mt19937 rng(0xCAFE);
    const std::vector<TrapdoorSpec> pool{kIpId, kSeq, kTs, kEsp};
    for (int iter = 0; iter < 40; ++iter) {
        HybridChannelConfig config;
        for (const auto& spec : pool) {
            if (rng() % 2 == 0) config.trapdoors.push_back(spec);
        }
        if (config.trapdoors.empty()) config.trapdoors.push_back(pool[rng() % pool.size()]);
        std::shuffle(config.trapdoors.begin(), config.trapdoors.end(), rng);

        const auto trace = gen_legit_trace(120 + rng() % 160, kAllProtocols, rng());
        const std::size_t cap = channel_capacity_bytes(trace, config);

        CovertPayload fits(std::min<std::size_t>(cap, 400), 0x5A);
        CHECK_NOTHROW(embed_hybrid(trace, config, fits));
        if (cap < 400) {
            CovertPayload overflow(cap + 1, 0x5A);
            CHECK_THROWS_AS(embed_hybrid(trace, config, overflow), CapacityError);
        }
    }
}

TEST_CASE("hybrid round-trip with untouched bystander fields, randomized") {
    std::mt19937 rng(0xD1CE);
    const std::vector<TrapdoorSpec> pool{kIpId, kSeq, kTs, kEsp};
    for (int iter = 0; iter < 100; ++iter) {
        HybridChannelConfig config;
        for (const auto& spec : pool) {
            if (rng() % 2 == 0) config.trapdoors.push_back(spec);
        }
        if (config.trapdoors.empty()) config.trapdoors.push_back(pool[rng() % pool.size()]);
        std::shuffle(config.trapdoors.begin(), config.trapdoors.end(), rng);

        CovertPayload payload(rng() % 61);
        for (auto& byte : payload) byte = static_cast<std::uint8_t>(rng() & 0xFF);

        const auto trace = gen_legit_trace(1800, kAllProtocols, rng());
        const auto result = embed_hybrid(trace, config, payload);
        CHECK(extract_hybrid(result.trace, config, payload.size()) == payload);
        check_non_interference(trace, result.trace, config);
    }
}

TEST_CASE("noisy scenario") {
    ScenarioConfig cfg;
    cfg.kind = ScenarioKind::Noisy;
    cfg.n_packets = 600;
    cfg.seed = 41;
    const HybridChannelConfig channel{{kIpId}, ""};

    SUBCASE("fully overt with an empty payload stays legitimate") {
        cfg.overt_fraction = 1.0;
        const auto trace = scenario_noisy(cfg, channel, {});
        CHECK(trace == gen_legit_trace(600, {ProtocolKind::IPv4, ProtocolKind::TCP}, 41));
        for (const auto& pkt : trace) {
            CHECK_FALSE(pkt.covert_marker.has_value());
        }
    }
    SUBCASE("markers count the packets that carry payload") {
        cfg.overt_fraction = 0.5;
        const auto payload = bytes_of("meet at dawn");
        const auto trace = scenario_noisy(cfg, channel, payload);
        std::size_t markers = 0;
        for (const auto& pkt : trace) {
            if (pkt.covert_marker.value_or(false)) ++markers;
        }
        CHECK(markers == payload.size()); // one IPv4 carrier per byte
        CHECK(extract_hybrid(marked_only(trace), channel, payload.size()) == payload);
    }
    SUBCASE("deterministic per seed") {
        cfg.overt_fraction = 0.5;
        CHECK(scenario_noisy(cfg, channel, bytes_of("x")) ==
              scenario_noisy(cfg, channel, bytes_of("x")));
    }
    SUBCASE("payload beyond covert capacity is a capacity error") {
        cfg.overt_fraction = 0.99;
        CHECK_THROWS_AS(scenario_noisy(cfg, channel, CovertPayload(500, 1)), CapacityError);
    }
    SUBCASE("invalid fractions and kinds are config errors") {
        cfg.overt_fraction = 0.0;
        CHECK_THROWS_AS(scenario_noisy(cfg, channel, {}), ConfigError);
        cfg.overt_fraction = 1.5;
        CHECK_THROWS_AS(scenario_noisy(cfg, channel, {}), ConfigError);
        ScenarioConfig wrong = cfg;
        wrong.kind = ScenarioKind::Noiseless;
        CHECK_THROWS_AS(scenario_noisy(wrong, channel, {}), ConfigError);
    }
}

TEST_CASE("noiseless scenario") {
    ScenarioConfig cfg;
    cfg.kind = ScenarioKind::Noiseless;
    cfg.seed = 10;

    SUBCASE("one channel with hop period covering the trace equals a plain embed") {
        cfg.n_packets = 120;
        cfg.hop_period = 200;
        const HybridChannelConfig channel{{kSeq}, ""};
        const auto payload = bytes_of("protocol hop");
        const auto scenario = scenario_noiseless(cfg, {channel}, payload);

        const auto base = gen_legit_trace(120, {ProtocolKind::TCP}, 10);
        const auto direct = embed_hybrid(base, channel, payload);
        CHECK(strip_markers(scenario) == direct.trace);
        CHECK(extract_noiseless(scenario, cfg, {channel}, payload.size()) == payload);
    }
    SUBCASE("two channels at hop period one alternate protocols and bytes") {
        cfg.n_packets = 40;
        cfg.hop_period = 1;
        const HybridChannelConfig ip_channel{{kIpId}, ""};
        const HybridChannelConfig tcp_channel{{kSeq}, ""};
        const auto payload = bytes_of("ABCD");
        // default mix cycles [ipv4, tcp]; hop h uses channels[h % 2]
        const auto trace = scenario_noiseless(cfg, {ip_channel, tcp_channel}, payload);
        CHECK(scheme1_decode(static_cast<std::uint16_t>(
                  trace[0].fields.at("identification"))) == 'A');
        CHECK(scheme2_decode(trace[1].fields.at("sequence_number")) == 'B');
        CHECK(scheme1_decode(static_cast<std::uint16_t>(
                  trace[2].fields.at("identification"))) == 'C');
        CHECK(scheme2_decode(trace[3].fields.at("sequence_number")) == 'D');
        CHECK(extract_noiseless(trace, cfg, {ip_channel, tcp_channel}, 4) == payload);
    }
    SUBCASE("empty payload leaves the generated trace unchanged") {
        cfg.n_packets = 30;
        cfg.hop_period = 5;
        const HybridChannelConfig channel{{kIpId}, ""};
        const auto trace = scenario_noiseless(cfg, {channel}, {});
        CHECK(trace == gen_legit_trace(30, {ProtocolKind::IPv4}, 10));
    }
    SUBCASE("round-trip across hops and channels") {
        cfg.n_packets = 512;
        cfg.hop_period = 48;
        const std::vector<HybridChannelConfig> channels{
            {{kIpId, kSeq}, ""}, {{kEsp}, ""}, {{kTs}, ""}};
        const auto payload = bytes_of(english_text(70));
        const auto trace = scenario_noiseless(cfg, channels, payload);
        CHECK(extract_noiseless(trace, cfg, channels, payload.size()) == payload);
        CHECK(scenario_noiseless(cfg, channels, payload) == trace);
    }
    SUBCASE("capacity and config errors") {
        cfg.n_packets = 16;
        cfg.hop_period = 4;
        const HybridChannelConfig channel{{kIpId}, ""};
        CHECK_THROWS_AS(scenario_noiseless(cfg, {channel}, CovertPayload(64, 1)),
                        CapacityError);
        CHECK_THROWS_AS(scenario_noiseless(cfg, {}, {}), ConfigError);
        cfg.hop_period = 0;
        CHECK_THROWS_AS(scenario_noiseless(cfg, {channel}, {}), ConfigError);
    }
}
