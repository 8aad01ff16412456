#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "keynet/topology.hpp"

namespace keynet {

struct QkdRateParams {
    double source_rate_hz = 0.0;
    double protocol_efficiency = 1.0;  // in (0,1]
    double loss_db_per_km = kDefaultLossDbPerKm;
    double length_km = 0.0;
    ProtocolMode protocol_mode = ProtocolMode::Repeaterless;
    double cutoff_rate_hz = 0.0;  // rates below this count as zero

    bool operator==(const QkdRateParams&) const = default;
};

struct KemRateParams {
    double handshakes_per_sec = 0.0;
    double bits_per_handshake = 0.0;
    double rtt_ms = 0.0;
    double bandwidth_bits_per_sec = 0.0;

    bool operator==(const KemRateParams&) const = default;
};

using LinkRateParams = std::variant<QkdRateParams, KemRateParams>;
using RateAssignment = std::map<std::string, LinkRateParams>;

// Channel transmittance 10^(-loss*length/10).
double transmittance(double loss_db_per_km, double length_km);

// source * efficiency * eta (Repeaterless) or * sqrt(eta) (TwinField), zero
// below the cutoff. Throws InvalidArgument on out-of-range parameters.
double qkd_rate(const QkdRateParams& p);

// Handshake throughput discounted by round-trip stalls, capped by bandwidth:
// min(h * b / (1 + h * rtt), bandwidth).
double kem_rate(const KemRateParams& p);

double link_rate(const LinkRateParams& p);

// Per-link field replacements; unset fields keep the value the link would
// otherwise get from the topology and the deployment defaults.
struct QkdRateOverride {
    std::optional<double> source_rate_hz;
    std::optional<double> protocol_efficiency;
    std::optional<double> loss_db_per_km;
    std::optional<double> length_km;
    std::optional<ProtocolMode> protocol_mode;
    std::optional<double> cutoff_rate_hz;

    QkdRateParams applied_to(QkdRateParams base) const;
    bool operator==(const QkdRateOverride&) const = default;
};

struct KemRateOverride {
    std::optional<double> handshakes_per_sec;
    std::optional<double> bits_per_handshake;
    std::optional<double> rtt_ms;
    std::optional<double> bandwidth_bits_per_sec;

    KemRateParams applied_to(KemRateParams base) const;
    bool operator==(const KemRateOverride&) const = default;
};

using LinkRateOverride = std::variant<QkdRateOverride, KemRateOverride>;

// Deployment-level rate parameters. The numbers are illustrative defaults,
// not measurements; scenarios override any of them.
struct RateConfig {
    double qkd_source_rate_hz = 1e9;
    double qkd_protocol_efficiency = 1e-3;
    double qkd_cutoff_rate_hz = 1.0;
    double kem_bits_per_handshake = 256.0;
    double kem_bandwidth_bits_per_sec = 1e9;
    double kem_handshakes_limited = 1e2;
    double kem_handshakes_high_performance = 1e5;
    // Round-trip time per km of fibre, used when sweeping KEM rate over distance.
    double kem_rtt_ms_per_km = 0.01;
    // Per-link replacements, applied on top of the defaults above.
    std::map<std::string, LinkRateOverride> link_overrides;

    double handshakes_for(ComputeTier tier) const {
        return tier == ComputeTier::Limited ? kem_handshakes_limited : kem_handshakes_high_performance;
    }
    bool operator==(const RateConfig&) const = default;
};

// Rate parameters for one link: its physical fields from the topology, the
// rest from `config`. A KEM link runs at the slower compute tier of its two
// endpoints.
LinkRateParams rate_params_for(const NetworkTopology& topology, const Link& link, const RateConfig& config);
RateAssignment assign_rates(const NetworkTopology& topology, const RateConfig& config);

// Slowest segment of a contiguous alice->bob path. Throws InvalidArgument if
// the path is not contiguous or does not join alice to bob.
double end_to_end_rate(const NetworkTopology& topology, const std::vector<std::string>& path,
                       const RateAssignment& assignment);

struct CrossoverResult {
    std::optional<double> distance_km;
    std::string reason;  // set when distance_km is empty
};

inline constexpr double kCrossoverSearchLimitKm = 1e5;
inline constexpr double kCrossoverRelativeTolerance = 1e-9;

// Distance at which a nonincreasing QKD rate curve meets a constant KEM
// rate, by bisection over [0, 1e5] km.
CrossoverResult crossover_distance(const std::function<double(double)>& qkd_rate_at_km, double kem_rate_bps);

// Same, for the phenomenological curve; the template's length_km is ignored.
CrossoverResult crossover_distance(const QkdRateParams& qkd_template, const KemRateParams& kem);

struct SweepRow {
    double distance_km;
    double qkd_repeaterless;
    double qkd_twin_field;
    double kem_limited;
    double kem_high_performance;
};

// Rates from `from_km` to `to_km` inclusive in `step_km` increments.
std::vector<SweepRow> rate_sweep(const RateConfig& config, double loss_db_per_km, double from_km, double to_km,
                                 double step_km);

}  // namespace keynet
