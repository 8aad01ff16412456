#include <gtest/gtest.h>

#include <random>

#include "keynet/digest.hpp"
#include "keynet/random.hpp"

using namespace keynet;

TEST(SeededStream, SameSeedSameBytes) {
    SeededStream a(99), b(99);
    std::vector<std::uint8_t> x(1000), y(1000);
    a.fill(x);
    b.fill(y);
    EXPECT_EQ(x, y);
}

TEST(SeededStream, ChunkingDoesNotChangeTheSequence) {
    SeededStream a(7), b(7);
    std::vector<std::uint8_t> whole(97);
    a.fill(whole);
    std::vector<std::uint8_t> parts;
    for (std::size_t n : {1, 3, 8, 13, 72}) {
        std::vector<std::uint8_t> chunk(n);
        b.fill(chunk);
        parts.insert(parts.end(), chunk.begin(), chunk.end());
    }
    EXPECT_EQ(whole, parts);
    EXPECT_EQ(b.bytes_drawn(), 97u);
}

TEST(SeededStream, DerivedStreamsDifferByLabel) {
    auto a = SeededStream::derive(1, "link:q1");
    auto b = SeededStream::derive(1, "link:q2");
    auto c = SeededStream::derive(2, "link:q1");
    std::vector<std::uint8_t> x(32), y(32), z(32);
    a.fill(x);
    b.fill(y);
    c.fill(z);
    EXPECT_NE(x, y);
    EXPECT_NE(x, z);
}

TEST(SeededStream, PinnedOutputForSeedZero) {
    // Guards against accidental changes to seeding or byte order, which
    // would silently change every simulated key.
    SeededStream s(0);
    std::vector<std::uint8_t> x(16);
    s.fill(x);
    EXPECT_EQ(to_hex(x.data(), x.size()), "b37963eba6073159aa9cfe93097fd9cc");

    // Same bytes from the standard engine seeded the documented way.
    std::seed_seq seq{0u, 0u};
    std::mt19937_64 ref(seq);
    std::vector<std::uint8_t> y;
    for (int i = 0; i < 2; ++i) {
        std::uint64_t w = ref();
        for (int b = 0; b < 8; ++b, w >>= 8) y.push_back(static_cast<std::uint8_t>(w));
    }
    EXPECT_EQ(x, y);
}

TEST(Digest, Sha256KnownVectors) {
    EXPECT_EQ(sha256_hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}
