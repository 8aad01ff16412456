#include <gtest/gtest.h>

#include <random>

#include "fixtures.hpp"
#include "keynet/combiners.hpp"
#include "keynet/digest.hpp"
#include "keynet/error.hpp"
#include "scripted_source.hpp"

using namespace keynet;
using namespace keynet::testing;

namespace {

KeyMaterial km(std::vector<std::uint8_t> b, std::string origin = "t") { return KeyMaterial(std::move(b), std::move(origin)); }

}  // namespace

TEST(KeyMaterial, InvariantsHold) {
    const auto k = km({1, 2, 3});
    EXPECT_EQ(k.length_bits(), 24u);
    EXPECT_THROW(KeyMaterial({1}, ""), InvalidArgument);
}

TEST(XorCombine, Examples) {
    const auto k = km({0xAB, 0xCD}, "q1");
    EXPECT_TRUE(xor_combine(std::vector{k}).same_bits(k));
    EXPECT_EQ(xor_combine(std::vector{k, k}).bytes(), (std::vector<std::uint8_t>{0, 0}));
    const auto out = xor_combine(std::vector{km({0xF0}, "a"), km({0x0F}, "b"), km({0xFF}, "c")});
    EXPECT_EQ(out.bytes(), std::vector<std::uint8_t>{0x00});
    EXPECT_EQ(out.origin(), "xor(a,b,c)");
}

TEST(XorCombine, Errors) {
    EXPECT_THROW(xor_combine(std::vector<KeyMaterial>{}), InvalidArgument);
    EXPECT_THROW(xor_combine(std::vector{km({1}), km({1, 2})}), InvalidArgument);
}

TEST(XorCombine, CommutativeAndAssociative) {
    std::mt19937_64 rng(2);
    for (int i = 0; i < 100; ++i) {
        std::vector<KeyMaterial> keys;
        for (int j = 0; j < 4; ++j) {
            std::vector<std::uint8_t> b(37);
            for (auto& x : b) x = static_cast<std::uint8_t>(rng());
            keys.push_back(km(b));
        }
        auto shuffled = keys;
        std::shuffle(shuffled.begin(), shuffled.end(), rng);
        const auto ab = xor_combine(std::vector{keys[0], keys[1]});
        const auto cd = xor_combine(std::vector{keys[2], keys[3]});
        EXPECT_TRUE(xor_combine(keys).same_bits(xor_combine(shuffled)));
        EXPECT_TRUE(xor_combine(keys).same_bits(xor_combine(std::vector{ab, cd})));
    }
}

TEST(XorCombine, FourBitUniformityWithOneUniformInput) {
    // Output is uniform whenever one input is uniform and independent.
    for (int fixed = 0; fixed < 16; ++fixed) {
        std::array<int, 16> counts{};
        for (int u = 0; u < 16; ++u)
            ++counts[xor_combine(std::vector{km({std::uint8_t(fixed)}), km({std::uint8_t(u)})}).bytes()[0]];
        for (int c : counts) EXPECT_EQ(c, 1);
    }
}

TEST(ShareSecret, ThresholdOneCopiesTheSecret) {
    SeededStream rng(1);
    const auto secret = km({9, 8, 7, 6});
    for (const auto& s : share_secret(secret, 1, 5, rng)) EXPECT_EQ(s.payload, secret.bytes());
    EXPECT_EQ(rng.bytes_drawn(), 0u);
}

TEST(ShareSecret, TwoOfThreeLieOnOneLine) {
    SeededStream rng(1234), replay(1234);
    const auto shares = share_secret(km({0x2A}), 2, 3, rng);
    const std::uint8_t a1 = replay.next();  // the seeded slope
    ASSERT_EQ(shares.size(), 3u);
    for (const auto& s : shares) EXPECT_EQ(s.payload[0], Gf256::add(0x2A, Gf256::mul(a1, s.index)));
    if (a1 != 0) {
        EXPECT_NE(shares[0].payload, shares[1].payload);
        EXPECT_NE(shares[1].payload, shares[2].payload);
        EXPECT_NE(shares[0].payload, shares[2].payload);
    }
}

TEST(ShareSecret, CoefficientsDrawnDegreeMajor) {
    // Two symbols, t=3: stream supplies a1(s0), a1(s1), a2(s0), a2(s1).
    ScriptedStream rng({1, 2, 3, 4});
    const auto shares = share_secret(km({0x10, 0x20}), 3, 3, rng);
    for (const auto& s : shares) {
        const std::uint8_t x = s.index, x2 = Gf256::mul(x, x);
        EXPECT_EQ(s.payload[0], 0x10 ^ Gf256::mul(1, x) ^ Gf256::mul(3, x2));
        EXPECT_EQ(s.payload[1], 0x20 ^ Gf256::mul(2, x) ^ Gf256::mul(4, x2));
    }
}

TEST(ShareSecret, ParameterBounds) {
    SeededStream rng(1);
    EXPECT_THROW(share_secret(km({1}), 0, 3, rng), InvalidArgument);
    EXPECT_THROW(share_secret(km({1}), 4, 3, rng), InvalidArgument);
    EXPECT_THROW(share_secret(km({1}), 2, 256, rng), InvalidArgument);
    EXPECT_THROW(share_secret(km({1}), 2, 16, rng, FieldTag::Gf16), InvalidArgument);
    EXPECT_THROW(share_secret(km({16}), 2, 3, rng, FieldTag::Gf16), InvalidArgument);  // not a GF(16) element
}

TEST(Reconstruct, AllSubsetsTwoOfThreeAndTwoOfTwo) {
    SeededStream rng(77);
    const auto secret = km({0xDE, 0xAD, 0xBE, 0xEF});
    const auto shares = share_secret(secret, 2, 3, rng);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            if (i != j) EXPECT_EQ(reconstruct(std::vector{shares[i], shares[j]}).bytes(), secret.bytes());
    const auto two = share_secret(secret, 2, 2, rng);
    EXPECT_EQ(reconstruct(two).bytes(), secret.bytes());
}

TEST(Reconstruct, SingleShareAtThresholdOne) {
    SeededStream rng(1);
    const auto shares = share_secret(km({5, 6}), 1, 3, rng);
    EXPECT_EQ(reconstruct(std::vector{shares[2]}).bytes(), shares[2].payload);
}

TEST(Reconstruct, Errors) {
    SeededStream rng(1);
    const auto shares = share_secret(km({5, 6}), 2, 3, rng);
    try {
        reconstruct(std::vector{shares[0], shares[0]});
        FAIL();
    } catch (const InvalidArgument& e) {
        EXPECT_NE(std::string(e.what()).find("duplicate indices"), std::string::npos);
    }
    EXPECT_THROW(reconstruct(std::vector{shares[0]}), InvalidArgument);
    auto other = share_secret(km({5, 6}), 2, 4, rng);
    EXPECT_THROW(reconstruct(std::vector{shares[0], other[1]}), InvalidArgument);
    EXPECT_THROW(reconstruct(std::vector<SecretShare>{}), InvalidArgument);
}

TEST(Reconstruct, RandomizedRoundTripAllFields) {
    std::mt19937_64 rng(31337);
    for (int c = 0; c < 1000; ++c) {
        const FieldTag field = std::array{FieldTag::Gf256, FieldTag::Gf16, FieldTag::Gf17}[c % 3];
        const unsigned order = field_order(field);
        const unsigned n = 1 + static_cast<unsigned>(rng() % std::min(6u, order - 1));
        const unsigned t = 1 + static_cast<unsigned>(rng() % n);
        std::vector<std::uint8_t> secret(1 + rng() % 20);
        for (auto& b : secret) b = static_cast<std::uint8_t>(rng() % order);
        SeededStream coeffs(rng());
        auto shares = share_secret(km(secret), t, n, coeffs, field);
        std::shuffle(shares.begin(), shares.end(), rng);
        shares.resize(t);
        ASSERT_EQ(reconstruct(shares).bytes(), secret) << "case " << c;
    }
}

TEST(ShareWire, EncodeDecodeRoundTripAndGolden) {
    SecretShare s{3, {0xAA, 0xBB, 0xCC}, ShareScheme{2, 5, FieldTag::Gf256}};
    const auto wire = encode_share(s);
    EXPECT_EQ(to_hex(wire.data(), wire.size()), "0102050301aabbcc");
    EXPECT_EQ(decode_share(wire), s);

    SecretShare g{4, {0x0F}, ShareScheme{3, 4, FieldTag::Gf16}};
    EXPECT_EQ(encode_share(g), (std::vector<std::uint8_t>{1, 3, 4, 4, 2, 0x0F}));
    SecretShare p{1, {16}, ShareScheme{1, 1, FieldTag::Gf17}};
    EXPECT_EQ(encode_share(p), (std::vector<std::uint8_t>{1, 1, 1, 1, 3, 16}));
}

TEST(ShareWire, GoldenFileForSeededSharing) {
    SeededStream rng(2024);
    const auto shares = share_secret(km({0x00, 0x01, 0x02, 0x03, 0xFE, 0xFF}), 3, 5, rng);
    std::string text;
    for (const auto& s : shares) {
        const auto w = encode_share(s);
        text += to_hex(w.data(), w.size()) + "\n";
    }
    EXPECT_EQ(text, slurp(golden_dir() / "shares_seed2024_t3_n5.txt"));
}

TEST(ShareWire, DecodeRejectsBadInput) {
    EXPECT_THROW(decode_share(std::vector<std::uint8_t>{1, 2, 3}), ParseError);
    EXPECT_THROW(decode_share(std::vector<std::uint8_t>{9, 2, 3, 1, 1, 0}), ParseError);
    EXPECT_THROW(decode_share(std::vector<std::uint8_t>{1, 2, 3, 1, 7, 0}), ParseError);
    EXPECT_THROW(decode_share(std::vector<std::uint8_t>{1, 2, 3, 0, 1, 0}), ParseError);  // index 0
    EXPECT_THROW(decode_share(std::vector<std::uint8_t>{1, 4, 3, 1, 1, 0}), ParseError);  // t > n
}
