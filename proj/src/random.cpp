#include "keynet/random.hpp"

#include <array>

#include "keynet/digest.hpp"

namespace keynet {

SeededStream::SeededStream(std::uint64_t seed) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
    engine_.seed(seq);
}

SeededStream::SeededStream(std::seed_seq& seq) : engine_(seq) {}

SeededStream SeededStream::derive(std::uint64_t seed, std::string_view label) {
    const auto digest = sha256(label);
    std::array<std::uint32_t, 10> words{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
    for (std::size_t i = 0; i < 8; ++i) {
        words[2 + i] = std::uint32_t{digest[4 * i]} | std::uint32_t{digest[4 * i + 1]} << 8 |
                       std::uint32_t{digest[4 * i + 2]} << 16 | std::uint32_t{digest[4 * i + 3]} << 24;
    }
    std::seed_seq seq(words.begin(), words.end());
    return SeededStream(seq);
}

void SeededStream::produce(std::span<std::uint8_t> out) {
    for (auto& b : out) {
        if (buffered_ == 0) {
            buffer_ = engine_();
            buffered_ = 8;
        }
        b = static_cast<std::uint8_t>(buffer_);
        buffer_ >>= 8;
        --buffered_;
    }
}

}  // namespace keynet
