#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "keynet/error.hpp"
#include "keynet/protocols.hpp"
#include "oracles.hpp"
#include "scripted_source.hpp"

using namespace keynet;
using namespace keynet::testing;

namespace {

struct Env {
    NetworkTopology topology;
    RateAssignment rates;
    explicit Env(const std::string& name) : topology(load_topology(name)), rates(assign_rates(topology, RateConfig{})) {}
};

std::vector<std::uint8_t> bytes_of(SeededKeySource& src, const std::string& link, std::size_t n) {
    // What a fresh source with the same seed would hand to that link.
    std::vector<std::uint8_t> out(n);
    src.link_stream(link).fill(out);
    return out;
}

}  // namespace

TEST(EstablishLinkKey, LiveLinkGivesKeyAndElapsed) {
    Env e("minimal");
    SeededKeySource a(1), b(1);
    const double rate = link_rate(e.rates.at("q1"));
    const auto k1 = establish_link_key(e.topology.link("q1"), rate, 128, a);
    const auto k2 = establish_link_key(e.topology.link("q1"), rate, 128, b);
    EXPECT_EQ(k1.key.length_bits(), 128u);
    EXPECT_TRUE(k1.key.same_bits(k2.key));
    EXPECT_DOUBLE_EQ(k1.elapsed_s, 128.0 / rate);
    EXPECT_EQ(a.link_bytes_drawn().at("q1"), 16u);
}

TEST(EstablishLinkKey, DeadLinkAborts) {
    Env e("dead_link");
    SeededKeySource src(1);
    try {
        establish_link_key(e.topology.link("q_far"), link_rate(e.rates.at("q_far")), 128, src);
        FAIL();
    } catch (const ProtocolAbort& ex) {
        EXPECT_EQ(ex.element_id(), "q_far");
        EXPECT_EQ(std::string(ex.what()), "link q_far dead at this distance");
    }
    EXPECT_THROW(establish_link_key(e.topology.link("q1"), 1.0, 12, src), InvalidArgument);
}

TEST(SeriesRelay, SingleLinkHasNoTranscript) {
    Env e("minimal");
    SeededKeySource src(3), ref(3);
    const auto r = run_series_relay(e.topology, {"c", {"q1"}}, 256, e.rates, src);
    EXPECT_TRUE(r.keys_match());
    EXPECT_TRUE(r.transcript.empty());
    EXPECT_EQ(r.alice_key.bytes(), bytes_of(ref, "q1", 32));
}

TEST(SeriesRelay, ThreeSegmentChainByHand) {
    Env e("series_chain");
    ScriptedKeySource src;
    src.set_link("q1", {0x5A, 0x01});
    src.set_link("k12", {0x3C, 0x02});
    src.set_link("q2", {0xF0, 0x04});
    const auto r = run_series_relay(e.topology, {"relay", {"q1", "k12", "q2"}}, 16, e.rates, src);
    ASSERT_EQ(r.transcript.size(), 2u);
    EXPECT_EQ(r.transcript[0].sender, "D1");
    EXPECT_EQ(r.transcript[0].payload, (std::vector<std::uint8_t>{0x5A ^ 0x3C, 0x03}));
    EXPECT_EQ(r.transcript[1].sender, "D2");
    EXPECT_EQ(r.transcript[1].payload, (std::vector<std::uint8_t>{0x3C ^ 0xF0, 0x06}));
    // Bob: k3 ^ c2 ^ c1 = k1.
    EXPECT_EQ(r.bob_key.bytes(), (std::vector<std::uint8_t>{0x5A, 0x01}));
    EXPECT_TRUE(r.keys_match());
    const double slowest = std::min({link_rate(e.rates.at("q1")), link_rate(e.rates.at("k12")), link_rate(e.rates.at("q2"))});
    EXPECT_DOUBLE_EQ(r.elapsed_model_time, 16.0 / slowest);
}

TEST(SeriesRelay, TranscriptAloneIsConsistentWithEveryKey) {
    Env e("series_chain");
    // For a fixed transcript, each candidate K corresponds to exactly one
    // assignment of the remaining keys.
    std::map<std::vector<std::uint8_t>, std::array<int, 16>> seen;
    for (int a = 0; a < 16; ++a)
        for (int b = 0; b < 16; ++b)
            for (int c = 0; c < 16; ++c) {
                ScriptedKeySource src;
                src.set_link("q1", {std::uint8_t(a)});
                src.set_link("k12", {std::uint8_t(b)});
                src.set_link("q2", {std::uint8_t(c)});
                const auto r = run_series_relay(e.topology, {"relay", {"q1", "k12", "q2"}}, 8, e.rates, src);
                std::vector<std::uint8_t> t;
                for (const auto& m : r.transcript) t.insert(t.end(), m.payload.begin(), m.payload.end());
                ++seen[t][r.alice_key.bytes()[0]];
            }
    for (const auto& [t, counts] : seen)
        for (int k = 0; k < 16; ++k) EXPECT_EQ(counts[k], 1);
}

TEST(SeriesRelay, DeadLinkAbortsNamingIt) {
    Env e("dead_link");
    SeededKeySource src(1);
    try {
        run_series_relay(e.topology, {"c", {"q1", "q_far"}}, 64, e.rates, src);
        FAIL();
    } catch (const ProtocolAbort& ex) {
        EXPECT_EQ(ex.element_id(), "q_far");
    }
    EXPECT_TRUE(src.link_bytes_drawn().empty());
}

TEST(ParallelXor, FinalKeyIsXorOfLinkKeys) {
    Env e("parallel_xor");
    SeededKeySource src(9), ref(9);
    const auto r = run_parallel_xor(e.topology, std::vector<Channel>{{"c1", {"q1"}}, {"c2", {"k1"}}}, 64, e.rates, src);
    const auto a = bytes_of(ref, "q1", 8), b = bytes_of(ref, "k1", 8);
    std::vector<std::uint8_t> x(8);
    for (int i = 0; i < 8; ++i) x[i] = a[i] ^ b[i];
    EXPECT_EQ(r.alice_key.bytes(), x);
    EXPECT_TRUE(r.keys_match());
}

TEST(ParallelXor, SeriesRelayChannelKeepsContract) {
    Env e("shared_relay");
    SeededKeySource src(4);
    const auto r = run_parallel_xor(e.topology, std::vector<Channel>{{"c1", {"q1", "k1"}}, {"c2", {"q2", "k2"}}}, 128,
                                    e.rates, src);
    EXPECT_TRUE(r.keys_match());
    EXPECT_EQ(r.alice_key.length_bits(), 128u);
    EXPECT_EQ(r.transcript.size(), 2u);
}

TEST(ParallelXor, DeadChannelAbortsBeforeDrawingKeys) {
    Env e("dead_link");
    SeededKeySource src(1);
    try {
        run_parallel_xor(e.topology, std::vector<Channel>{{"kem", {"k1"}}, {"far", {"q1", "q_far"}}}, 64, e.rates, src);
        FAIL();
    } catch (const ProtocolAbort& ex) {
        EXPECT_EQ(ex.element_id(), "far");
        EXPECT_NE(std::string(ex.what()).find("channel far"), std::string::npos);
    }
    EXPECT_TRUE(src.link_bytes_drawn().empty());
}

TEST(SecretSharing, ThresholdEqualsChannelCountNeedsAll) {
    Env e("dead_link");
    SeededKeySource src(1);
    EXPECT_THROW(run_parallel_secret_sharing(e.topology, std::vector<Channel>{{"kem", {"k1"}}, {"far", {"q1", "q_far"}}},
                                             2, 64, e.rates, src),
                 ProtocolAbort);
}

TEST(SecretSharing, TwoOfThreeToleratesOneDeadChannel) {
    // Three direct channels, one of them past the QKD cutoff.
    const auto t = parse_topology(R"({"nodes":[{"id":"A","kind":"EndUser"},{"id":"B","kind":"EndUser"}],
      "links":[{"id":"q1","endpoints":["A","B"],"kind":"Qkd","length_km":10},
               {"id":"q2","endpoints":["A","B"],"kind":"Qkd","length_km":900},
               {"id":"k1","endpoints":["A","B"],"kind":"Kem","algorithm_label":"lattice-kem"}],"alice":"A","bob":"B"})");
    const auto rates = assign_rates(t, RateConfig{});
    const std::vector<Channel> ch{{"c1", {"q1"}}, {"c2", {"q2"}}, {"c3", {"k1"}}};
    SeededKeySource src(21);
    const auto r = run_parallel_secret_sharing(t, ch, 2, 128, rates, src);
    EXPECT_TRUE(r.keys_match());
    EXPECT_FALSE(r.channels[1].delivered);
    EXPECT_EQ(r.channels[1].failure, "link q2 dead at this distance");
    EXPECT_EQ(r.transcript.size(), 2u);

    // Oracle: replay alice's sharing from the session stream and reconstruct
    // from the two delivered shares with the combiners module.
    auto session = SeededStream::derive(21, "session");
    std::vector<std::uint8_t> k(16);
    session.fill(k);
    EXPECT_EQ(r.alice_key.bytes(), k);
    const auto shares = share_secret(KeyMaterial(k, "k"), 2, 3, session);
    EXPECT_EQ(reconstruct(std::vector{shares[0], shares[2]}).bytes(), k);
    // Pads cover header plus payload.
    EXPECT_EQ(r.link_bytes_drawn.at("q1"), kShareHeaderBytes + 16);
    EXPECT_EQ(r.link_bytes_drawn.count("q2"), 0u);
}

TEST(SecretSharing, FewerThanThresholdLiveChannelsAborts) {
    Env e("dead_link");
    SeededKeySource src(1);
    try {
        run_parallel_secret_sharing(e.topology, std::vector<Channel>{{"far", {"q1", "q_far"}}, {"kem", {"k1"}}}, 2, 64,
                                    e.rates, src);
        FAIL();
    } catch (const ProtocolAbort& ex) {
        EXPECT_EQ(std::string(ex.what()), "fewer than t live channels (1 live, t=2)");
    }
}

TEST(SecretSharing, ThresholdOneEitherChannelRevealsKey) {
    Env e("parallel_xor");
    const ProtocolConfig cfg{ProtocolKind::ParallelSecretSharing, {{"c1", {"q1"}}, {"c2", {"k1"}}}, 1, FieldTag::Gf256};
    SeededKeySource src(5);
    const auto r = run_protocol(e.topology, cfg, 64, e.rates, src);
    ASSERT_TRUE(r.keys_match());
    for (const char* el : {"q1", "k1"}) {
        const auto got = recover_final_key(e.topology, cfg, r, {el});
        ASSERT_TRUE(got);
        EXPECT_TRUE(got->same_bits(r.alice_key));
        EXPECT_TRUE(evaluate(derive_access_formula(e.topology, cfg), {el}));
    }
    EXPECT_FALSE(recover_final_key(e.topology, cfg, r, {}));
}

TEST(Protocols, KeysMatchAndReplayAcrossSeeds) {
    struct Case {
        std::string topo;
        ProtocolConfig cfg;
    };
    const std::vector<Case> cases{
        {"series_chain", {ProtocolKind::Series, {{"c", {"q1", "k12", "q2"}}}, 0, FieldTag::Gf256}},
        {"shared_relay", {ProtocolKind::ParallelXor, {{"a", {"q1", "k1"}}, {"b", {"q2", "k2"}}}, 0, FieldTag::Gf256}},
        {"secret_sharing",
         {ProtocolKind::ParallelSecretSharing, {{"a", {"q1", "q2"}}, {"b", {"q3"}}, {"c", {"k1"}}}, 2, FieldTag::Gf256}},
        {"secret_sharing",
         {ProtocolKind::ParallelSecretSharing, {{"a", {"q1", "q2"}}, {"b", {"q3"}}, {"c", {"k1"}}}, 3, FieldTag::Gf17}},
    };
    for (const auto& c : cases) {
        Env e(c.topo);
        for (std::uint64_t seed = 0; seed < 50; ++seed) {
            SeededKeySource s1(seed), s2(seed);
            const auto r1 = run_protocol(e.topology, c.cfg, 64, e.rates, s1);
            const auto r2 = run_protocol(e.topology, c.cfg, 64, e.rates, s2);
            ASSERT_TRUE(r1.keys_match()) << c.topo << " seed " << seed;
            ASSERT_EQ(r1, r2);
            // Key accounting: every link's stream gave exactly what the run recorded.
            EXPECT_EQ(r1.link_bytes_drawn, s1.link_bytes_drawn());
        }
    }
}

TEST(Protocols, KeyConsumptionMatchesDemand) {
    Env e("series_chain");
    SeededKeySource src(8);
    const ProtocolConfig cfg{ProtocolKind::Series, {{"c", {"q1", "k12", "q2"}}}, 0, FieldTag::Gf256};
    const auto r = run_protocol(e.topology, cfg, 256, e.rates, src);
    for (const char* id : {"q1", "k12", "q2"}) EXPECT_EQ(r.link_bytes_drawn.at(id), 32u) << id;
}

TEST(Protocols, ConfigChecks) {
    Env e("parallel_xor");
    SeededKeySource src(1);
    EXPECT_THROW(run_protocol(e.topology, {ProtocolKind::Series, {{"a", {"q1"}}, {"b", {"k1"}}}, 0, FieldTag::Gf256}, 64,
                              e.rates, src),
                 InvalidArgument);
    EXPECT_THROW(run_protocol(e.topology, {ProtocolKind::ParallelXor, {{"a", {"q1"}}}, 0, FieldTag::Gf256}, 64, e.rates, src),
                 InvalidArgument);
    EXPECT_THROW(run_protocol(e.topology, {ProtocolKind::ParallelSecretSharing, {{"a", {"q1"}}, {"b", {"k1"}}}, 3,
                                           FieldTag::Gf256},
                              64, e.rates, src),
                 InvalidArgument);
    EXPECT_THROW(run_protocol(e.topology, {ProtocolKind::Series, {{"a", {"nope"}}}, 0, FieldTag::Gf256}, 64, e.rates, src),
                 InvalidArgument);
    EXPECT_THROW(run_protocol(e.topology, {ProtocolKind::Series, {{"a", {"q1"}}}, 0, FieldTag::Gf256}, 12, e.rates, src),
                 InvalidArgument);
    const auto v = check_channel(e.topology, {"x", {}});
    ASSERT_EQ(v.size(), 1u);
}

TEST(Protocols, SharedElementWarning) {
    Env e("shared_relay");
    const std::vector<Channel> ch{{"c1", {"q1", "k1"}}, {"c2", {"q2", "k2"}}};
    EXPECT_EQ(shared_element_warnings(e.topology, ch), std::vector<std::string>{"channels c1, c2 share element D1"});
}

TEST(Protocols, DeskScaleTheoremOnSeriesChain) {
    // Small instance of the acceptance theorem, kept in the unit suite for
    // fast feedback.
    Env e("series_chain");
    const ProtocolConfig cfg{ProtocolKind::Series, {{"c", {"q1", "k12", "q2"}}}, 0, FieldTag::Gf256};
    const auto r = desk_scale_theorem(e.topology, cfg);
    EXPECT_EQ(r.runs, 4096u);
    EXPECT_EQ(r.subsets, 32u);
    EXPECT_EQ(r.theorem_mismatches, 0u) << r.first_failure;
    EXPECT_EQ(r.adversary_mismatches, 0u) << r.first_failure;
    EXPECT_EQ(r.uniformity_failures, 0u) << r.first_failure;
}

TEST(Protocols, DeskScaleTheoremOnOneOfTwoSharing) {
    Env e("parallel_xor");
    const ProtocolConfig cfg{ProtocolKind::ParallelSecretSharing, {{"c1", {"q1"}}, {"c2", {"k1"}}}, 1, FieldTag::Gf16};
    const auto r = desk_scale_theorem(e.topology, cfg);
    EXPECT_EQ(r.theorem_mismatches + r.adversary_mismatches + r.uniformity_failures + r.broken_runs, 0u) << r.first_failure;
}
