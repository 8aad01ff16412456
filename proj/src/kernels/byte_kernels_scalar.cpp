#include "keynet/finite_field.hpp"
#include "keynet/kernels/byte_kernels.hpp"

namespace keynet::kernels {
namespace {

void xor_into_scalar(std::uint8_t* dst, const std::uint8_t* src, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) dst[i] ^= src[i];
}

void gf256_mul_add_scalar(std::uint8_t* dst, const std::uint8_t* src, std::uint8_t c, std::size_t n) {
    if (c == 0) return;
    if (c == 1) {
        xor_into_scalar(dst, src, n);
        return;
    }
    const auto& t = gf256_detail::tables;
    const unsigned lc = t.log[c];
    for (std::size_t i = 0; i < n; ++i) {
        const std::uint8_t s = src[i];
        if (s) dst[i] ^= t.exp[lc + t.log[s]];
    }
}

constexpr ByteKernels kScalar{Isa::Scalar, "scalar", &xor_into_scalar, &gf256_mul_add_scalar};

}  // namespace

const ByteKernels& scalar_kernels() { return kScalar; }

}  // namespace keynet::kernels
