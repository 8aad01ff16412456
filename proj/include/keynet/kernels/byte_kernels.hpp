#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

// Byte-parallel kernels behind the combiners: region XOR and GF(2^8)
// multiply-accumulate. Each has a scalar reference and, where the CPU allows,
// a vectorized variant picked once at startup.
namespace keynet::kernels {

enum class Isa { Scalar, Avx2 };

struct ByteKernels {
    Isa isa;
    std::string_view name;
    // dst[i] ^= src[i]
    void (*xor_into)(std::uint8_t* dst, const std::uint8_t* src, std::size_t n);
    // dst[i] ^= c * src[i] in GF(2^8) mod x^8+x^4+x^3+x+1
    void (*gf256_mul_add)(std::uint8_t* dst, const std::uint8_t* src, std::uint8_t c, std::size_t n);
};

// Reference implementation; always available.
const ByteKernels& scalar_kernels();

// Kernel table for an ISA, or nullptr when it was not compiled in or the CPU
// lacks it.
const ByteKernels* kernels_for(Isa isa);

// Every variant usable on this machine, scalar first.
std::vector<const ByteKernels*> available_kernels();

// Best available variant. KEYNET_ISA=scalar in the environment pins the
// reference path.
const ByteKernels& active();

inline void xor_into(std::span<std::uint8_t> dst, std::span<const std::uint8_t> src) {
    active().xor_into(dst.data(), src.data(), dst.size() < src.size() ? dst.size() : src.size());
}

inline void gf256_mul_add(std::span<std::uint8_t> dst, std::span<const std::uint8_t> src, std::uint8_t c) {
    active().gf256_mul_add(dst.data(), src.data(), c, dst.size() < src.size() ? dst.size() : src.size());
}

namespace detail {
const ByteKernels* avx2_kernels();  // defined only when compiled with AVX2 support
}

}  // namespace keynet::kernels
