#include <doctest.h>

#include <filesystem>
#include <set>
#include <sstream>

#include "covertlab/detector.hpp"
#include "covertlab/hybrid_channel.hpp"
#include "test_helpers.hpp"

using namespace covertlab;
using namespace covertlab::testing;

namespace {

const std::vector<ProtocolKind> kAllProtocols{ProtocolKind::IPv4, ProtocolKind::TCP,
                                              ProtocolKind::IPSecESP};

std::set<std::pair<std::string, std::size_t>> flagged_set(const DetectionReport& report) {
    std::set<std::pair<std::string, std::size_t>> flags;
    for (const auto& [key, window] : report.flagged_windows) {
        flags.insert({to_string(key), window});
    }
    return flags;
}

} // namespace

TEST_CASE("symbolizers reduce values to scheme-mirroring views") {
    CHECK(apply_symbolizer(0xAABBCCDDu, Symbolizer::LowByte) == 0xDD);
    CHECK(apply_symbolizer(0xAABBCCDDu, Symbolizer::HighByte) == 0xAA);
    CHECK(apply_symbolizer(0xAABBCCDDu, Symbolizer::Lsb) == 1);
    CHECK(apply_symbolizer(0x10u, Symbolizer::Lsb) == 0);
}

TEST_CASE("each scheme target field gets its mirroring symbolizer") {
    CHECK(default_symbolizers(ProtocolKind::IPv4, "identification") ==
          std::vector<Symbolizer>{Symbolizer::LowByte});
    CHECK(default_symbolizers(ProtocolKind::TCP, "sequence_number") ==
          std::vector<Symbolizer>{Symbolizer::HighByte});
    CHECK(default_symbolizers(ProtocolKind::TCP, "options_timestamp") ==
          std::vector<Symbolizer>{Symbolizer::Lsb});
    CHECK(default_symbolizers(ProtocolKind::IPSecESP, "sequence_number") ==
          std::vector<Symbolizer>{Symbolizer::LowByte});
}

TEST_CASE("constant fields give an all-zero entropy series") {
    auto trace = gen_legit_trace(512, {ProtocolKind::IPv4}, 13);
    for (auto& pkt : trace) {
        pkt.fields["identification"] = 5;
    }
    for (double h : field_entropy_series(trace, ProtocolKind::IPv4, "identification",
                                         Symbolizer::LowByte, 64)) {
        CHECK(h == 0.0);
    }
}

TEST_CASE("series length is the number of full windows") {
    const auto trace = gen_legit_trace(600, {ProtocolKind::IPv4}, 14);
    CHECK(field_entropy_series(trace, ProtocolKind::IPv4, "identification",
                               Symbolizer::LowByte, 256)
              .size() == 2);
    CHECK_THROWS_AS(field_entropy_series(trace, ProtocolKind::IPv4, "identification",
                                         Symbolizer::LowByte, 601),
                    std::domain_error);
}

TEST_CASE("text embedding depresses low-byte entropy below the uniform band") {
    const auto clean = gen_legit_trace(1024, {ProtocolKind::IPv4}, 15);
    const HybridChannelConfig channel{
        {{ProtocolKind::IPv4, "identification", SchemeId::IpIdModulus}}, ""};
    const auto payload = english_text(600);
    const auto covert =
        embed_hybrid(clean, channel, CovertPayload(payload.begin(), payload.end())).trace;

    const auto clean_series = field_entropy_series(clean, ProtocolKind::IPv4,
                                                   "identification", Symbolizer::LowByte, 256);
    const auto covert_series = field_entropy_series(
        covert, ProtocolKind::IPv4, "identification", Symbolizer::LowByte, 256);
    // first two windows are pure covert text, far below any uniform window
    for (std::size_t w = 0; w < 2; ++w) {
        CHECK(covert_series[w] < 5.0);
        CHECK(clean_series[w] > 7.0);
    }
}

TEST_CASE("baseline learns a closed band and stays deterministic") {
    std::vector<Trace> traces;
    for (std::uint64_t seed : {31ull, 32ull, 33ull}) {
        traces.push_back(gen_legit_trace(2048, kAllProtocols, seed));
    }
    const auto profile = build_baseline(traces, 64);
    const auto profile_again = build_baseline(traces, 64);
    CHECK(profile.serialize() == profile_again.serialize());

    for (const auto& [key, band] : profile.bands()) {
        CHECK(band.min_entropy <= band.mean_entropy);
        CHECK(band.mean_entropy <= band.max_entropy);
        CHECK(band.window_size == 64);
        CHECK(band.windows_observed >= kMinTrainingWindows);
        // replay: every training window falls inside the learned band
        for (const auto& trace : traces) {
            for (double h :
                 field_entropy_series(trace, key.proto, key.field, key.sym, 64)) {
                CHECK(h >= band.min_entropy);
                CHECK(h <= band.max_entropy);
            }
        }
    }
}

TEST_CASE("constant training field learns the [0,0] band") {
    auto trace = gen_legit_trace(320, {ProtocolKind::IPv4}, 17);
    for (auto& pkt : trace) {
        pkt.fields["identification"] = 99;
    }
    const auto profile = build_baseline({trace}, 16);
    const auto& band = profile.bands().at(
        {ProtocolKind::IPv4, "identification", Symbolizer::LowByte});
    CHECK(band.min_entropy == 0.0);
    CHECK(band.max_entropy == 0.0);
}

TEST_CASE("training errors") {
    CHECK_THROWS_AS(build_baseline({}, 64), TrainingError);
    // five windows per field is below the ten-window floor
    const auto tiny = gen_legit_trace(5 * 256, {ProtocolKind::IPv4}, 18);
    CHECK_THROWS_AS(build_baseline({tiny}, 256), TrainingError);
    // no full window at all
    const auto dust = gen_legit_trace(10, {ProtocolKind::IPv4}, 18);
    CHECK_THROWS_AS(build_baseline({dust}, 256), TrainingError);
    CHECK_THROWS_AS(build_baseline({tiny}, 4), std::invalid_argument); // window too small
    auto corrupt = gen_legit_trace(512, {ProtocolKind::IPv4}, 19);
    corrupt[0].fields["identification"] = 1u << 20;
    CHECK_THROWS_AS(build_baseline({corrupt}, 16), ValidationError);
}

TEST_CASE("profile serialization is the documented line format") {
    BaselineProfile profile;
    BaselineBand band;
    band.min_entropy = 1.0;
    band.mean_entropy = 2.25;
    band.max_entropy = 3.5;
    band.window_size = 256;
    profile.set({ProtocolKind::IPv4, "identification", Symbolizer::LowByte}, band);
    band.min_entropy = 0.5;
    band.mean_entropy = 0.75;
    band.max_entropy = 0.9;
    band.window_size = 64;
    profile.set({ProtocolKind::TCP, "options_timestamp", Symbolizer::Lsb}, band);

    CHECK(profile.serialize() ==
          "ipv4 identification lowbyte 1.000000 2.250000 3.500000 256\n"
          "tcp options_timestamp lsb 0.500000 0.750000 0.900000 64\n");

    std::istringstream in(profile.serialize());
    const auto parsed = BaselineProfile::parse(in);
    CHECK(parsed.serialize() == profile.serialize());
}

TEST_CASE("profile parsing rejects malformed lines") {
    auto expect_error = [](const std::string& text) {
        std::istringstream in(text);
        CHECK_THROWS_AS(BaselineProfile::parse(in), ParseError);
    };
    expect_error("ipv4 identification lowbyte 1.0 2.0\n");              // short line
    expect_error("ipv4 identification lowbyte 1.0 2.0 3.0 256 extra\n"); // long line
    expect_error("smtp identification lowbyte 1.0 2.0 3.0 256\n");       // bad proto
    expect_error("ipv4 identification topbyte 1.0 2.0 3.0 256\n");       // bad symbolizer
    expect_error("ipv4 identification lowbyte 3.0 2.0 1.0 256\n");       // min > max
    expect_error("ipv4 identification lowbyte 1.0 2.0 3.0 8\n");         // window too small
}

TEST_CASE("detection flags depressed entropy and stays blind to markers") {
    std::vector<Trace> training;
    for (std::uint64_t seed : {51ull, 52ull, 53ull}) {
        training.push_back(gen_legit_trace(3072, kAllProtocols, seed));
    }
    const auto profile = build_baseline(training, 64);

    SUBCASE("training traces are clean against their own profile at margin zero") {
        for (const auto& trace : training) {
            CHECK(detect(trace, profile, 0.0, 1).verdict == Verdict::Clean);
        }
    }

    SUBCASE("text payload flags the targeted field") {
        auto covert = gen_legit_trace(3072, kAllProtocols, 60);
        const HybridChannelConfig channel{
            {{ProtocolKind::IPv4, "identification", SchemeId::IpIdModulus}}, ""};
        const auto text = english_text(512);
        covert = embed_hybrid(covert, channel, CovertPayload(text.begin(), text.end())).trace;

        const auto report = detect(covert, profile);
        CHECK(report.verdict == Verdict::Suspicious);
        bool id_flagged = false;
        for (const auto& fv : report.fields) {
            if (fv.key.field == "identification" && fv.flagged_count >= 2) id_flagged = true;
        }
        CHECK(id_flagged);

        // removing the ground-truth markers cannot change the verdict
        auto unmarked = covert;
        for (auto& pkt : unmarked) pkt.covert_marker.reset();
        const auto blind = detect(unmarked, profile);
        CHECK(blind.verdict == report.verdict);
        CHECK(flagged_set(blind) == flagged_set(report));
    }

    SUBCASE("constant covert payload drops entropy to zero and flags") {
        auto covert = gen_legit_trace(3072, kAllProtocols, 61);
        const HybridChannelConfig channel{
            {{ProtocolKind::IPv4, "identification", SchemeId::IpIdModulus}}, ""};
        covert = embed_hybrid(covert, channel, CovertPayload(256, 0x00)).trace;
        CHECK(detect(covert, profile).verdict == Verdict::Suspicious);
    }

    SUBCASE("biased timestamp LSBs flag through the lsb view") {
        // all-zero payload bits pin the timestamp parity; legitimate LSB
        // entropy sits near one bit per sample
        auto covert = gen_legit_trace(3072, kAllProtocols, 64);
        const HybridChannelConfig channel{
            {{ProtocolKind::TCP, "options_timestamp", SchemeId::TimestampLsb}}, ""};
        covert = embed_hybrid(covert, channel, CovertPayload(32, 0x00)).trace;
        const auto report = detect(covert, profile);
        CHECK(report.verdict == Verdict::Suspicious);
        bool ts_flagged = false;
        for (const auto& fv : report.fields) {
            if (fv.key.field == "options_timestamp" && fv.flagged_count >= 2) {
                ts_flagged = true;
            }
        }
        CHECK(ts_flagged);
    }

    SUBCASE("flagged windows shrink as the margin grows") {
        auto covert = gen_legit_trace(3072, kAllProtocols, 62);
        const HybridChannelConfig channel{
            {{ProtocolKind::IPv4, "identification", SchemeId::IpIdModulus}}, ""};
        const auto text = english_text(400);
        covert = embed_hybrid(covert, channel, CovertPayload(text.begin(), text.end())).trace;

        const auto tight = flagged_set(detect(covert, profile, 0.0, 1));
        const auto loose = flagged_set(detect(covert, profile, 1.0, 1));
        const auto looser = flagged_set(detect(covert, profile, 4.5, 1));
        for (const auto& flag : loose) {
            CHECK(tight.count(flag) == 1);
        }
        CHECK(loose.size() <= tight.size());
        CHECK(looser.size() <= loose.size());
    }

    SUBCASE("monitored fields missing from the trace are config errors") {
        const auto ipv4_only = gen_legit_trace(512, {ProtocolKind::IPv4}, 63);
        CHECK_THROWS_AS(detect(ipv4_only, profile), ConfigError);
    }

    SUBCASE("invalid detection parameters") {
        CHECK_THROWS_AS(detect(training[0], profile, -0.5, 1), std::invalid_argument);
        CHECK_THROWS_AS(detect(training[0], profile, 0.0, 0), std::invalid_argument);
    }
}

TEST_CASE("profile save/load round-trip") {
    const auto traces = std::vector<Trace>{gen_legit_trace(2048, kAllProtocols, 71)};
    const auto profile = build_baseline(traces, 64);
    const auto path =
        (std::filesystem::temp_directory_path() / "covertlab_profile_test.txt").string();
    profile.save(path);
    const auto loaded = BaselineProfile::load(path);
    CHECK(loaded.serialize() == profile.serialize());
    std::filesystem::remove(path);
    CHECK_THROWS_AS(BaselineProfile::load("/nonexistent/profile.txt"), IoError);
}
