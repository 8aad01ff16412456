#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "keynet/protocols.hpp"
#include "keynet/rate_models.hpp"

namespace keynet {

struct RateOption {
    std::string name;
    std::vector<std::string> path;
};

struct CrossoverRequest {
    std::string name;
    QkdRateParams qkd;  // length_km unused
    KemRateParams kem;
};

// Everything a run needs besides the topology: rate overrides, the protocol
// deployment, key length, seed and which analyses to perform.
struct Scenario {
    RateConfig rates;
    // True when some rate parameter fell back to the built-in illustrative value.
    bool rates_defaulted = true;
    double sweep_loss_db_per_km = kDefaultLossDbPerKm;
    std::vector<RateOption> rate_options;
    std::vector<CrossoverRequest> crossovers;
    std::optional<ProtocolConfig> protocol;
    std::size_t length_bits = 256;
    std::optional<std::uint64_t> seed;
    bool access_structures = true;
    bool break_probability = true;
};

// Strict JSON scenario document. Throws ParseError on malformed input.
Scenario parse_scenario(std::string_view text);

}  // namespace keynet
