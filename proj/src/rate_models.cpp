#include "keynet/rate_models.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "keynet/error.hpp"

namespace keynet {

double transmittance(double loss_db_per_km, double length_km) {
    return std::pow(10.0, -loss_db_per_km * length_km / 10.0);
}

double qkd_rate(const QkdRateParams& p) {
    if (!(p.source_rate_hz >= 0) || !(p.protocol_efficiency > 0) || !(p.protocol_efficiency <= 1) ||
        !(p.loss_db_per_km >= 0) || !(p.length_km >= 0) || !(p.cutoff_rate_hz >= 0))
        throw InvalidArgument("invalid QKD rate parameters");
    const double eta = transmittance(p.loss_db_per_km, p.length_km);
    const double scale = p.protocol_mode == ProtocolMode::TwinField ? std::sqrt(eta) : eta;
    const double rate = p.source_rate_hz * p.protocol_efficiency * scale;
    return rate < p.cutoff_rate_hz ? 0.0 : rate;
}

double kem_rate(const KemRateParams& p) {
    if (!(p.handshakes_per_sec >= 0) || !(p.bits_per_handshake >= 0) || !(p.rtt_ms >= 0) ||
        !(p.bandwidth_bits_per_sec >= 0))
        throw InvalidArgument("invalid KEM rate parameters");
    const double compute = p.handshakes_per_sec * p.bits_per_handshake / (1.0 + p.handshakes_per_sec * p.rtt_ms / 1000.0);
    return std::min(compute, p.bandwidth_bits_per_sec);
}

double link_rate(const LinkRateParams& p) {
    return std::visit(
        [](const auto& v) {
            if constexpr (std::is_same_v<std::decay_t<decltype(v)>, QkdRateParams>)
                return qkd_rate(v);
            else
                return kem_rate(v);
        },
        p);
}

QkdRateParams QkdRateOverride::applied_to(QkdRateParams p) const {
    p.source_rate_hz = source_rate_hz.value_or(p.source_rate_hz);
    p.protocol_efficiency = protocol_efficiency.value_or(p.protocol_efficiency);
    p.loss_db_per_km = loss_db_per_km.value_or(p.loss_db_per_km);
    p.length_km = length_km.value_or(p.length_km);
    p.protocol_mode = protocol_mode.value_or(p.protocol_mode);
    p.cutoff_rate_hz = cutoff_rate_hz.value_or(p.cutoff_rate_hz);
    return p;
}

KemRateParams KemRateOverride::applied_to(KemRateParams p) const {
    p.handshakes_per_sec = handshakes_per_sec.value_or(p.handshakes_per_sec);
    p.bits_per_handshake = bits_per_handshake.value_or(p.bits_per_handshake);
    p.rtt_ms = rtt_ms.value_or(p.rtt_ms);
    p.bandwidth_bits_per_sec = bandwidth_bits_per_sec.value_or(p.bandwidth_bits_per_sec);
    return p;
}

LinkRateParams rate_params_for(const NetworkTopology& topology, const Link& link, const RateConfig& config) {
    const auto it = config.link_overrides.find(link.id);
    const LinkRateOverride* over = it == config.link_overrides.end() ? nullptr : &it->second;
    if (over && (link.kind() == LinkKind::Qkd) != std::holds_alternative<QkdRateOverride>(*over))
        throw InvalidArgument(fmt::format("rate override for link {} does not match its kind", link.id));

    if (const auto* q = link.qkd()) {
        const QkdRateParams base{config.qkd_source_rate_hz, config.qkd_protocol_efficiency, q->loss_db_per_km,
                                 q->length_km,           q->protocol_mode,               config.qkd_cutoff_rate_hz};
        return over ? std::get<QkdRateOverride>(*over).applied_to(base) : base;
    }
    const auto& a = topology.node(link.endpoints[0]);
    const auto& b = topology.node(link.endpoints[1]);
    const ComputeTier tier = (a.compute_tier == ComputeTier::Limited || b.compute_tier == ComputeTier::Limited)
                                 ? ComputeTier::Limited
                                 : ComputeTier::HighPerformance;
    const KemRateParams base{config.handshakes_for(tier), config.kem_bits_per_handshake, link.kem()->rtt_ms,
                             config.kem_bandwidth_bits_per_sec};
    return over ? std::get<KemRateOverride>(*over).applied_to(base) : base;
}

RateAssignment assign_rates(const NetworkTopology& topology, const RateConfig& config) {
    RateAssignment out;
    for (const Link& l : topology.links()) out.emplace(l.id, rate_params_for(topology, l, config));
    return out;
}

double end_to_end_rate(const NetworkTopology& topology, const std::vector<std::string>& path,
                       const RateAssignment& assignment) {
    if (path.empty()) throw InvalidArgument("path endpoints wrong: empty path");
    const auto nodes = walk_path(topology, topology.alice(), path);
    if (nodes.back() != topology.bob())
        throw InvalidArgument(fmt::format("path endpoints wrong: path ends at {}, not bob ({})", nodes.back(),
                                          topology.bob()));
    double rate = std::numeric_limits<double>::infinity();
    for (const std::string& id : path) {
        auto it = assignment.find(id);
        if (it == assignment.end()) throw InvalidArgument(fmt::format("no rate parameters for link {}", id));
        rate = std::min(rate, link_rate(it->second));
    }
    return rate;
}

CrossoverResult crossover_distance(const std::function<double(double)>& qkd_at, double kem) {
    const double at_zero = qkd_at(0.0);
    if (!(at_zero > kem))
        return {std::nullopt, fmt::format("KEM rate {} is not below the zero-distance QKD rate {}", kem, at_zero)};
    double lo = 0.0, hi = kCrossoverSearchLimitKm;
    if (qkd_at(hi) >= kem)
        return {std::nullopt, fmt::format("no crossover in [0, {} km]", kCrossoverSearchLimitKm)};
    // Invariant: qkd(lo) > kem >= qkd(hi).
    for (int iter = 0; iter < 400 && hi - lo > kCrossoverRelativeTolerance * hi; ++iter) {
        const double mid = 0.5 * (lo + hi);
        if (qkd_at(mid) > kem)
            lo = mid;
        else
            hi = mid;
    }
    return {0.5 * (lo + hi), {}};
}

CrossoverResult crossover_distance(const QkdRateParams& tmpl, const KemRateParams& kem) {
    return crossover_distance(
        [tmpl](double km) {
            QkdRateParams p = tmpl;
            p.length_km = km;
            return qkd_rate(p);
        },
        kem_rate(kem));
}

std::vector<SweepRow> rate_sweep(const RateConfig& config, double loss_db_per_km, double from_km, double to_km,
                                 double step_km) {
    if (!(step_km > 0) || !(from_km >= 0) || !(to_km >= from_km))
        throw InvalidArgument(fmt::format("invalid sweep range {}..{}:{}", from_km, to_km, step_km));
    const auto count = static_cast<std::size_t>(std::floor((to_km - from_km) / step_km + 1e-9)) + 1;
    std::vector<SweepRow> rows;
    rows.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        const double d = from_km + static_cast<double>(i) * step_km;
        QkdRateParams q{config.qkd_source_rate_hz, config.qkd_protocol_efficiency, loss_db_per_km, d,
                        ProtocolMode::Repeaterless, config.qkd_cutoff_rate_hz};
        const double rl = qkd_rate(q);
        q.protocol_mode = ProtocolMode::TwinField;
        const double tf = qkd_rate(q);
        KemRateParams k{config.kem_handshakes_limited, config.kem_bits_per_handshake, d * config.kem_rtt_ms_per_km,
                        config.kem_bandwidth_bits_per_sec};
        const double kl = kem_rate(k);
        k.handshakes_per_sec = config.kem_handshakes_high_performance;
        rows.push_back({d, rl, tf, kl, kem_rate(k)});
    }
    return rows;
}

}  // namespace keynet
