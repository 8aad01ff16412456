#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "keynet/error.hpp"
#include "keynet/finite_field.hpp"
#include "keynet/random.hpp"

namespace keynet {

// A finite key held by one party, tagged with where it came from.
class KeyMaterial {
public:
    KeyMaterial(std::vector<std::uint8_t> bytes, std::string origin);

    const std::vector<std::uint8_t>& bytes() const noexcept { return bytes_; }
    std::size_t length_bits() const noexcept { return 8 * bytes_.size(); }
    std::size_t size() const noexcept { return bytes_.size(); }
    const std::string& origin() const noexcept { return origin_; }

    bool same_bits(const KeyMaterial& other) const noexcept { return bytes_ == other.bytes_; }
    bool operator==(const KeyMaterial&) const = default;

private:
    std::vector<std::uint8_t> bytes_;
    std::string origin_;
};

// Bitwise XOR of equal-length keys. The result's origin lists every input
// origin, e.g. "xor(q1,k1)".
KeyMaterial xor_combine(std::span<const KeyMaterial> keys);

struct ShareScheme {
    std::uint8_t threshold = 1;
    std::uint8_t share_count = 1;
    FieldTag field = FieldTag::Gf256;

    bool operator==(const ShareScheme&) const = default;
};

struct SecretShare {
    std::uint8_t index = 0;  // evaluation point x, 1..n
    std::vector<std::uint8_t> payload;
    ShareScheme scheme;

    bool operator==(const SecretShare&) const = default;
};

inline constexpr std::uint8_t kShareWireVersion = 1;
inline constexpr std::size_t kShareHeaderBytes = 5;

// Field order as an unsigned (256 for GF(2^8)).
unsigned field_order(FieldTag field);

// Threshold sharing of `secret`, one independent polynomial per symbol. Every
// secret byte must be an element of `field`. Coefficients are drawn from
// `rng` degree by degree: all degree-1 symbols, then all degree-2 symbols...
std::vector<SecretShare> share_secret(const KeyMaterial& secret, unsigned threshold, unsigned share_count,
                                      ByteStream& rng, FieldTag field = FieldTag::Gf256);

// Lagrange interpolation at zero over the first `threshold` shares.
KeyMaterial reconstruct(std::span<const SecretShare> shares, std::string origin = "reconstructed");

// `count` uniform elements of `field`, one per byte.
std::vector<std::uint8_t> sample_symbols(FieldTag field, std::size_t count, ByteStream& rng);

// Wire form: version, t, n, index, field tag, then payload bytes.
std::vector<std::uint8_t> encode_share(const SecretShare& share);
SecretShare decode_share(std::span<const std::uint8_t> wire);

// Field-generic Shamir core shared by the production GF(2^8) path and the
// small-field variants used for exhaustive secrecy checks.
namespace shamir {

template <ByteField F>
std::vector<std::vector<std::uint8_t>> sample_coefficients(std::size_t symbols, unsigned threshold, ByteStream& rng) {
    std::vector<std::vector<std::uint8_t>> coeffs(threshold > 0 ? threshold - 1 : 0,
                                                  std::vector<std::uint8_t>(symbols));
    for (auto& degree : coeffs)
        for (auto& c : degree) c = F::sample(rng);
    return coeffs;
}

// Share payloads for x = 1..share_count. coeffs[k-1] holds the degree-k
// coefficient of every symbol's polynomial.
template <ByteField F>
std::vector<std::vector<std::uint8_t>> evaluate_shares(std::span<const std::uint8_t> secret,
                                                       const std::vector<std::vector<std::uint8_t>>& coeffs,
                                                       unsigned share_count) {
    std::vector<std::vector<std::uint8_t>> shares;
    shares.reserve(share_count);
    for (unsigned x = 1; x <= share_count; ++x) {
        std::vector<std::uint8_t> payload(secret.begin(), secret.end());
        const auto point = static_cast<std::uint8_t>(x % F::order);
        std::uint8_t power = 1;
        for (const auto& degree : coeffs) {
            power = F::mul(power, point);
            F::mul_add_region(payload, degree, power);
        }
        shares.push_back(std::move(payload));
    }
    return shares;
}

// Value at x = 0 of the polynomials through (xs[i], ys[i]). xs must be
// distinct nonzero field elements.
template <ByteField F>
std::vector<std::uint8_t> interpolate_at_zero(std::span<const std::uint8_t> xs,
                                              std::span<const std::span<const std::uint8_t>> ys) {
    std::vector<std::uint8_t> out(ys.empty() ? 0 : ys.front().size(), 0);
    for (std::size_t i = 0; i < xs.size(); ++i) {
        // lambda_i = prod_{m != i} x_m / (x_m - x_i)
        std::uint8_t num = 1, den = 1;
        for (std::size_t m = 0; m < xs.size(); ++m) {
            if (m == i) continue;
            num = F::mul(num, xs[m]);
            den = F::mul(den, F::sub(xs[m], xs[i]));
        }
        F::mul_add_region(out, ys[i], F::mul(num, F::inv(den)));
    }
    return out;
}

}  // namespace shamir

}  // namespace keynet
