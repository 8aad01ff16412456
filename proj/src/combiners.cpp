#include "keynet/combiners.hpp"

#include <algorithm>
#include <set>

#include <fmt/format.h>

#include "keynet/kernels/byte_kernels.hpp"

namespace keynet {

KeyMaterial::KeyMaterial(std::vector<std::uint8_t> bytes, std::string origin)
    : bytes_(std::move(bytes)), origin_(std::move(origin)) {
    if (origin_.empty()) throw InvalidArgument("key origin must be nonempty");
}

KeyMaterial xor_combine(std::span<const KeyMaterial> keys) {
    if (keys.empty()) throw InvalidArgument("xor_combine: empty key list");
    std::vector<std::uint8_t> acc = keys.front().bytes();
    std::string origin = "xor(" + keys.front().origin();
    for (const KeyMaterial& k : keys.subspan(1)) {
        if (k.size() != acc.size())
            throw InvalidArgument(fmt::format("xor_combine: length mismatch ({} vs {} bits)", k.length_bits(),
                                              8 * acc.size()));
        kernels::xor_into(acc, k.bytes());
        origin += "," + k.origin();
    }
    return KeyMaterial(std::move(acc), origin + ")");
}

unsigned field_order(FieldTag field) {
    switch (field) {
        case FieldTag::Gf256:
            return Gf256::order;
        case FieldTag::Gf16:
            return Gf16::order;
        case FieldTag::Gf17:
            return Gf17::order;
    }
    throw InvalidArgument(fmt::format("unknown field tag {}", static_cast<int>(field)));
}

namespace {

template <class Fn>
decltype(auto) with_field(FieldTag field, Fn&& fn) {
    switch (field) {
        case FieldTag::Gf256:
            return fn(Gf256{});
        case FieldTag::Gf16:
            return fn(Gf16{});
        case FieldTag::Gf17:
            return fn(Gf17{});
    }
    throw InvalidArgument(fmt::format("unknown field tag {}", static_cast<int>(field)));
}

void check_scheme(unsigned t, unsigned n, FieldTag field) {
    const unsigned max_n = field_order(field) - 1;
    if (t < 1 || t > n || n > max_n)
        throw InvalidArgument(fmt::format("share parameters out of range: need 1 <= t <= n <= {} (t={}, n={})", max_n,
                                          t, n));
}

}  // namespace

std::vector<std::uint8_t> sample_symbols(FieldTag field, std::size_t count, ByteStream& rng) {
    return with_field(field, [&]<ByteField F>(F) {
        std::vector<std::uint8_t> out(count);
        for (auto& s : out) s = F::sample(rng);
        return out;
    });
}

std::vector<SecretShare> share_secret(const KeyMaterial& secret, unsigned t, unsigned n, ByteStream& rng,
                                      FieldTag field) {
    check_scheme(t, n, field);
    return with_field(field, [&]<ByteField F>(F) {
        for (std::uint8_t b : secret.bytes())
            if (!F::contains(b)) throw InvalidArgument(fmt::format("secret symbol {} outside the share field", b));
        const auto coeffs = shamir::sample_coefficients<F>(secret.size(), t, rng);
        auto payloads = shamir::evaluate_shares<F>(secret.bytes(), coeffs, n);
        std::vector<SecretShare> shares;
        shares.reserve(n);
        const ShareScheme scheme{static_cast<std::uint8_t>(t), static_cast<std::uint8_t>(n), field};
        for (unsigned j = 0; j < n; ++j)
            shares.push_back(SecretShare{static_cast<std::uint8_t>(j + 1), std::move(payloads[j]), scheme});
        return shares;
    });
}

KeyMaterial reconstruct(std::span<const SecretShare> shares, std::string origin) {
    if (shares.empty()) throw InvalidArgument("fewer than t shares (got 0)");
    const ShareScheme scheme = shares.front().scheme;
    std::set<std::uint8_t> seen;
    for (const SecretShare& s : shares) {
        if (s.scheme != scheme) throw InvalidArgument("mixed scheme tags");
        if (!seen.insert(s.index).second) throw InvalidArgument("duplicate indices");
        if (s.index == 0 || s.index > scheme.share_count)
            throw InvalidArgument(fmt::format("share index {} outside 1..{}", s.index, scheme.share_count));
        if (s.payload.size() != shares.front().payload.size()) throw InvalidArgument("share payload lengths differ");
    }
    check_scheme(scheme.threshold, scheme.share_count, scheme.field);
    if (shares.size() < scheme.threshold)
        throw InvalidArgument(fmt::format("fewer than t shares (got {}, t={})", shares.size(), scheme.threshold));

    const auto used = shares.first(scheme.threshold);
    std::vector<std::uint8_t> xs;
    std::vector<std::span<const std::uint8_t>> ys;
    for (const SecretShare& s : used) {
        xs.push_back(s.index);
        ys.emplace_back(s.payload);
    }
    auto secret = with_field(scheme.field, [&]<ByteField F>(F) {
        for (auto& x : xs) x = static_cast<std::uint8_t>(x % F::order);
        return shamir::interpolate_at_zero<F>(xs, ys);
    });
    return KeyMaterial(std::move(secret), std::move(origin));
}

std::vector<std::uint8_t> encode_share(const SecretShare& s) {
    std::vector<std::uint8_t> wire(kShareHeaderBytes + s.payload.size());
    wire[0] = kShareWireVersion;
    wire[1] = s.scheme.threshold;
    wire[2] = s.scheme.share_count;
    wire[3] = s.index;
    wire[4] = static_cast<std::uint8_t>(s.scheme.field);
    std::copy(s.payload.begin(), s.payload.end(), wire.begin() + kShareHeaderBytes);
    return wire;
}

SecretShare decode_share(std::span<const std::uint8_t> wire) {
    if (wire.size() < kShareHeaderBytes) throw ParseError("share shorter than its header");
    if (wire[0] != kShareWireVersion) throw ParseError(fmt::format("unsupported share version {}", wire[0]));
    const auto tag = static_cast<FieldTag>(wire[4]);
    if (tag != FieldTag::Gf256 && tag != FieldTag::Gf16 && tag != FieldTag::Gf17)
        throw ParseError(fmt::format("unknown field tag {}", wire[4]));
    SecretShare s;
    s.scheme = ShareScheme{wire[1], wire[2], tag};
    s.index = wire[3];
    s.payload.assign(wire.begin() + kShareHeaderBytes, wire.end());
    if (s.scheme.threshold < 1 || s.scheme.threshold > s.scheme.share_count || s.index < 1 ||
        s.index > s.scheme.share_count)
        throw ParseError("share header out of range");
    return s;
}

}  // namespace keynet
