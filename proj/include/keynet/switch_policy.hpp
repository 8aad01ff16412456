#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "keynet/topology.hpp"

namespace keynet {

enum class Severity { Advisory, Suspected, Demonstrated };

std::string_view to_string(Severity s);

struct ThreatEvent {
    std::string event_id;
    std::string target;  // mechanism label, e.g. "lattice-kem"
    Severity severity = Severity::Advisory;
    double model_time = 0.0;  // seconds
    std::string note;

    bool operator==(const ThreatEvent&) const = default;
};

// One JSON object per line; blank lines are skipped. Strict keys.
std::vector<ThreatEvent> parse_event_stream(std::string_view text);

enum class MechanismKind { Pqc, Qkd, HybridXor };
enum class KeySizeTier { Standard, Extended };

struct LinkMode {
    MechanismKind mechanism = MechanismKind::Pqc;
    std::string algorithm;  // active PQC label (for HybridXor: the PQC half)
    KeySizeTier tier = KeySizeTier::Standard;

    // "pqc:lattice-kem/standard", "qkd/extended", "hybrid-xor:lattice-kem/extended"
    std::string to_string() const;
    bool operator==(const LinkMode&) const = default;
};

// Protection order used by the policy: each step is strictly more protective.
enum class ProtectionLevel : int { PqcStandard = 0, PqcExtended = 1, MigratedPqc = 2, Quantum = 3 };

struct SwitchThresholds {
    double extend = 0.25;
    double migrate = 0.5;
    double quantum = 0.9;
    double hysteresis = 0.05;

    bool operator==(const SwitchThresholds&) const = default;
};

struct SwitchConfig {
    SwitchThresholds thresholds;
    double weight_advisory = 0.2;
    double weight_suspected = 0.5;
    double weight_demonstrated = 1.0;
    double half_life_s = 30.0 * 86400.0;
    bool quantum_uses_hybrid_xor = false;  // QKD-capable links go Hybrid-XOR instead of pure QKD
    std::string qkd_label = "qkd-detector";
    // PQC labels available for migration besides those deployed in the topology.
    std::vector<std::string> pqc_alternatives;
    // Re-evaluation cadence between events; 0 evaluates only at events.
    double tick_s = 86400.0;
    // Last evaluation time; defaults to the last event's time.
    std::optional<double> horizon_s;

    double weight(Severity s) const;
    bool operator==(const SwitchConfig&) const = default;
};

// Strict JSON; absent keys keep defaults. Throws ParseError/InvalidArgument.
SwitchConfig parse_switch_config(std::string_view text);
void check_switch_config(const SwitchConfig& config);

struct LinkSwitchState {
    std::string link_id;
    LinkKind kind = LinkKind::Kem;
    std::string risk_label;  // label whose risk drives this link
    bool has_qkd_sibling = false;
    bool has_pqc_alternative = false;
    LinkMode mode;
    int demand = 0;  // level asked for by risk, before feasibility
    int level = 0;   // ProtectionLevel actually in force

    ProtectionLevel protection() const { return static_cast<ProtectionLevel>(level); }
    bool operator==(const LinkSwitchState&) const = default;
};

struct Transition {
    std::string link_id;
    LinkMode from;
    LinkMode to;
    std::string reason;
    double model_time = 0.0;
    bool alert = false;

    bool operator==(const Transition&) const = default;
};

struct SwitchState {
    double model_time = 0.0;
    std::map<std::string, double> risk;  // per mechanism label, in [0,1]
    std::vector<LinkSwitchState> links;  // topology order
    std::vector<Transition> history;     // append-only
    std::vector<std::string> warnings;

    double risk_of(const std::string& label) const {
        auto it = risk.find(label);
        return it == risk.end() ? 0.0 : it->second;
    }
    const LinkSwitchState& link(std::string_view id) const;
    bool operator==(const SwitchState&) const = default;
};

SwitchState initial_switch_state(const NetworkTopology& topology, const SwitchConfig& config);

// Decays every risk score to time `t` (half-life decay).
void advance_time(SwitchState& state, double t, const SwitchConfig& config);

// Decays to the event time, then adds the severity weight to the target
// (capped at 1).
void assess_risk(SwitchState& state, const ThreatEvent& event, const SwitchConfig& config);

// Applies the threshold rules with hysteresis at the state's current time,
// appends the resulting transitions to the history and returns them.
std::vector<Transition> decide_switch(SwitchState& state, const NetworkTopology& topology, const SwitchConfig& config);

// Folds assess_risk/decide_switch over the events, with extra evaluations
// every tick_s up to the horizon. Throws InvalidArgument on unsorted events.
SwitchState replay(const std::vector<ThreatEvent>& events, const NetworkTopology& topology, const SwitchConfig& config);

// One JSON object per transition: {link_id, from, to, reason, model_time}.
std::string transition_log_jsonl(const std::vector<Transition>& log);

}  // namespace keynet
