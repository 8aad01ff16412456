#pragma once

#include <array>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <span>

#include "keynet/kernels/byte_kernels.hpp"
#include "keynet/random.hpp"

namespace keynet {

// Field identifiers as they appear in the share wire encoding.
enum class FieldTag : std::uint8_t {
    Gf256 = 0x01,  // GF(2^8) mod x^8+x^4+x^3+x+1
    Gf16 = 0x02,   // GF(2^4) mod x^4+x+1
    Gf17 = 0x03,   // integers mod 17
};

// Small fields whose elements fit in one byte. Secrets and share payloads are
// byte strings holding one element per byte.
template <class F>
concept ByteField = requires(std::uint8_t a, ByteStream& s, std::span<std::uint8_t> dst,
                             std::span<const std::uint8_t> src) {
    { F::tag } -> std::convertible_to<FieldTag>;
    { F::order } -> std::convertible_to<unsigned>;
    { F::add(a, a) } -> std::same_as<std::uint8_t>;
    { F::sub(a, a) } -> std::same_as<std::uint8_t>;
    { F::mul(a, a) } -> std::same_as<std::uint8_t>;
    { F::inv(a) } -> std::same_as<std::uint8_t>;
    { F::contains(a) } -> std::same_as<bool>;
    { F::sample(s) } -> std::same_as<std::uint8_t>;
    F::mul_add_region(dst, src, a);
};

namespace gf256_detail {

constexpr std::uint8_t xtime_mul(std::uint8_t a, std::uint8_t b) {
    std::uint8_t p = 0;
    while (b) {
        if (b & 1) p ^= a;
        const bool carry = a & 0x80;
        a = static_cast<std::uint8_t>(a << 1);
        if (carry) a ^= 0x1B;
        b >>= 1;
    }
    return p;
}

struct Tables {
    std::array<std::uint8_t, 512> exp{};
    std::array<std::uint8_t, 256> log{};
};

// 0x03 generates the multiplicative group for this modulus.
constexpr Tables make_tables() {
    Tables t;
    std::uint8_t x = 1;
    for (int i = 0; i < 255; ++i) {
        t.exp[i] = x;
        t.exp[i + 255] = x;
        t.log[x] = static_cast<std::uint8_t>(i);
        x = xtime_mul(x, 0x03);
    }
    t.exp[510] = t.exp[0];
    t.exp[511] = t.exp[1];
    return t;
}

inline constexpr Tables tables = make_tables();

}  // namespace gf256_detail

struct Gf256 {
    static constexpr FieldTag tag = FieldTag::Gf256;
    static constexpr unsigned order = 256;

    static constexpr std::uint8_t add(std::uint8_t a, std::uint8_t b) { return a ^ b; }
    static constexpr std::uint8_t sub(std::uint8_t a, std::uint8_t b) { return a ^ b; }
    static constexpr std::uint8_t mul(std::uint8_t a, std::uint8_t b) {
        if (a == 0 || b == 0) return 0;
        const auto& t = gf256_detail::tables;
        return t.exp[t.log[a] + t.log[b]];
    }
    // inv(0) is defined as 0; callers never divide by zero.
    static constexpr std::uint8_t inv(std::uint8_t a) {
        if (a == 0) return 0;
        const auto& t = gf256_detail::tables;
        return t.exp[255 - t.log[a]];
    }
    static constexpr bool contains(std::uint8_t) { return true; }
    static std::uint8_t sample(ByteStream& s) { return s.next(); }
    static void mul_add_region(std::span<std::uint8_t> dst, std::span<const std::uint8_t> src, std::uint8_t c) {
        kernels::gf256_mul_add(dst, src, c);
    }
};

struct Gf16 {
    static constexpr FieldTag tag = FieldTag::Gf16;
    static constexpr unsigned order = 16;

    static constexpr std::uint8_t add(std::uint8_t a, std::uint8_t b) { return a ^ b; }
    static constexpr std::uint8_t sub(std::uint8_t a, std::uint8_t b) { return a ^ b; }
    static constexpr std::uint8_t mul(std::uint8_t a, std::uint8_t b) {
        std::uint8_t p = 0;
        for (int i = 0; i < 4; ++i) {
            if (b & 1) p ^= a;
            b >>= 1;
            a = static_cast<std::uint8_t>(a << 1);
            if (a & 0x10) a ^= 0x13;
        }
        return p;
    }
    static constexpr std::uint8_t inv(std::uint8_t a) {
        // a^14 = a^-1 in a group of order 15
        std::uint8_t r = 1;
        for (int i = 0; i < 14; ++i) r = mul(r, a);
        return a == 0 ? 0 : r;
    }
    static constexpr bool contains(std::uint8_t a) { return a < 16; }
    static std::uint8_t sample(ByteStream& s) { return s.next() & 0x0F; }
    static void mul_add_region(std::span<std::uint8_t> dst, std::span<const std::uint8_t> src, std::uint8_t c) {
        const std::size_t n = dst.size() < src.size() ? dst.size() : src.size();
        for (std::size_t i = 0; i < n; ++i) dst[i] ^= mul(c, src[i]);
    }
};

template <unsigned P, FieldTag Tag>
    requires(P >= 2 && P <= 256)
struct PrimeField {
    static constexpr FieldTag tag = Tag;
    static constexpr unsigned order = P;

    static constexpr std::uint8_t add(std::uint8_t a, std::uint8_t b) {
        return static_cast<std::uint8_t>((unsigned{a} + b) % P);
    }
    static constexpr std::uint8_t sub(std::uint8_t a, std::uint8_t b) {
        return static_cast<std::uint8_t>((unsigned{a} + P - b) % P);
    }
    static constexpr std::uint8_t mul(std::uint8_t a, std::uint8_t b) {
        return static_cast<std::uint8_t>((unsigned{a} * b) % P);
    }
    static constexpr std::uint8_t inv(std::uint8_t a) {
        // Fermat: a^(P-2)
        unsigned r = 1, base = a % P, e = P - 2;
        while (e) {
            if (e & 1) r = r * base % P;
            base = base * base % P;
            e >>= 1;
        }
        return static_cast<std::uint8_t>(a % P == 0 ? 0 : r);
    }
    static constexpr bool contains(std::uint8_t a) { return a < P; }
    // Rejection sampling keeps the draw exactly uniform.
    static std::uint8_t sample(ByteStream& s) {
        constexpr unsigned limit = 256 - 256 % P;
        for (;;) {
            const unsigned b = s.next();
            if (b < limit) return static_cast<std::uint8_t>(b % P);
        }
    }
    static void mul_add_region(std::span<std::uint8_t> dst, std::span<const std::uint8_t> src, std::uint8_t c) {
        const std::size_t n = dst.size() < src.size() ? dst.size() : src.size();
        for (std::size_t i = 0; i < n; ++i) dst[i] = add(dst[i], mul(c, src[i]));
    }
};

using Gf17 = PrimeField<17, FieldTag::Gf17>;

static_assert(ByteField<Gf256>);
static_assert(ByteField<Gf16>);
static_assert(ByteField<Gf17>);

}  // namespace keynet
