#include <cstdlib>
#include <string_view>

#include "keynet/kernels/byte_kernels.hpp"

namespace keynet::kernels {
namespace {

bool cpu_has(Isa isa) {
    switch (isa) {
        case Isa::Scalar:
            return true;
        case Isa::Avx2:
#if defined(KEYNET_HAVE_AVX2) && (defined(__x86_64__) || defined(__i386__))
            return __builtin_cpu_supports("avx2");
#else
            return false;
#endif
    }
    return false;
}

const ByteKernels& select_active() {
    if (const char* env = std::getenv("KEYNET_ISA"); env && std::string_view(env) == "scalar") return scalar_kernels();
    if (const ByteKernels* k = kernels_for(Isa::Avx2)) return *k;
    return scalar_kernels();
}

}  // namespace

const ByteKernels* kernels_for(Isa isa) {
    if (!cpu_has(isa)) return nullptr;
    switch (isa) {
        case Isa::Scalar:
            return &scalar_kernels();
        case Isa::Avx2:
#if defined(KEYNET_HAVE_AVX2)
            return detail::avx2_kernels();
#else
            return nullptr;
#endif
    }
    return nullptr;
}

std::vector<const ByteKernels*> available_kernels() {
    std::vector<const ByteKernels*> out;
    for (Isa isa : {Isa::Scalar, Isa::Avx2})
        if (const ByteKernels* k = kernels_for(isa)) out.push_back(k);
    return out;
}

const ByteKernels& active() {
    static const ByteKernels& chosen = select_active();
    return chosen;
}

}  // namespace keynet::kernels
