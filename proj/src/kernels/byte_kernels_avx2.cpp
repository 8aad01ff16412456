#include <immintrin.h>

#include <array>

#include "keynet/finite_field.hpp"
#include "keynet/kernels/byte_kernels.hpp"

namespace keynet::kernels {
namespace {

void xor_into_avx2(std::uint8_t* dst, const std::uint8_t* src, std::size_t n) {
    std::size_t i = 0;
    for (; i + 64 <= n; i += 64) {
        __m256i d0 = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(dst + i));
        __m256i d1 = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(dst + i + 32));
        __m256i s0 = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(src + i));
        __m256i s1 = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(src + i + 32));
        _mm256_storeu_si256(reinterpret_cast<__m256i*>(dst + i), _mm256_xor_si256(d0, s0));
        _mm256_storeu_si256(reinterpret_cast<__m256i*>(dst + i + 32), _mm256_xor_si256(d1, s1));
    }
    for (; i + 32 <= n; i += 32) {
        __m256i d = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(dst + i));
        __m256i s = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(src + i));
        _mm256_storeu_si256(reinterpret_cast<__m256i*>(dst + i), _mm256_xor_si256(d, s));
    }
    for (; i < n; ++i) dst[i] ^= src[i];
}

// c * x splits as c * (x & 0x0F) ^ c * (x & 0xF0); each half is a 16-entry
// table lookup done by vpshufb.
void gf256_mul_add_avx2(std::uint8_t* dst, const std::uint8_t* src, std::uint8_t c, std::size_t n) {
    if (c == 0) return;
    if (c == 1) {
        xor_into_avx2(dst, src, n);
        return;
    }
    alignas(16) std::array<std::uint8_t, 16> lo{}, hi{};
    for (unsigned v = 0; v < 16; ++v) {
        lo[v] = Gf256::mul(c, static_cast<std::uint8_t>(v));
        hi[v] = Gf256::mul(c, static_cast<std::uint8_t>(v << 4));
    }
    const __m256i tlo = _mm256_broadcastsi128_si256(_mm_load_si128(reinterpret_cast<const __m128i*>(lo.data())));
    const __m256i thi = _mm256_broadcastsi128_si256(_mm_load_si128(reinterpret_cast<const __m128i*>(hi.data())));
    const __m256i mask = _mm256_set1_epi8(0x0F);

    std::size_t i = 0;
    for (; i + 32 <= n; i += 32) {
        const __m256i x = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(src + i));
        const __m256i xl = _mm256_and_si256(x, mask);
        const __m256i xh = _mm256_and_si256(_mm256_srli_epi16(x, 4), mask);
        const __m256i prod = _mm256_xor_si256(_mm256_shuffle_epi8(tlo, xl), _mm256_shuffle_epi8(thi, xh));
        const __m256i d = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(dst + i));
        _mm256_storeu_si256(reinterpret_cast<__m256i*>(dst + i), _mm256_xor_si256(d, prod));
    }
    for (; i < n; ++i) dst[i] ^= static_cast<std::uint8_t>(lo[src[i] & 0x0F] ^ hi[src[i] >> 4]);
}

constexpr ByteKernels kAvx2{Isa::Avx2, "avx2", &xor_into_avx2, &gf256_mul_add_avx2};

}  // namespace

namespace detail {
const ByteKernels* avx2_kernels() { return &kAvx2; }
}  // namespace detail

}  // namespace keynet::kernels
