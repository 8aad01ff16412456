#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string_view>

namespace keynet {

// Source of key and coefficient bytes. Every draw is counted so protocol
// runs can account for exactly how much key material they consumed.
class ByteStream {
public:
    virtual ~ByteStream() = default;

    void fill(std::span<std::uint8_t> out) {
        produce(out);
        drawn_ += out.size();
    }
    std::uint8_t next() {
        std::uint8_t b = 0;
        fill({&b, 1});
        return b;
    }
    std::size_t bytes_drawn() const noexcept { return drawn_; }

protected:
    virtual void produce(std::span<std::uint8_t> out) = 0;

private:
    std::size_t drawn_ = 0;
};

// Deterministic stream backed by mt19937_64 (whose output sequence is fixed by
// the standard). Bytes come out little-endian, eight per engine step, with no
// bytes skipped between calls.
class SeededStream final : public ByteStream {
public:
    explicit SeededStream(std::uint64_t seed);

    // Independent stream for a named purpose (e.g. "link:q1"), derived by
    // hashing the label together with the session seed.
    static SeededStream derive(std::uint64_t seed, std::string_view label);

protected:
    void produce(std::span<std::uint8_t> out) override;

private:
    explicit SeededStream(std::seed_seq& seq);

    std::mt19937_64 engine_;
    std::uint64_t buffer_ = 0;
    unsigned buffered_ = 0;
};

}  // namespace keynet
