#include "keynet/switch_policy.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "json.hpp"
#include "keynet/error.hpp"

namespace keynet {

using nlohmann::json;

std::string_view to_string(Severity s) {
    switch (s) {
        case Severity::Advisory:
            return "Advisory";
        case Severity::Suspected:
            return "Suspected";
        case Severity::Demonstrated:
            return "Demonstrated";
    }
    return "unknown";
}

std::string LinkMode::to_string() const {
    const char* tier_name = tier == KeySizeTier::Standard ? "standard" : "extended";
    switch (mechanism) {
        case MechanismKind::Pqc:
            return fmt::format("pqc:{}/{}", algorithm, tier_name);
        case MechanismKind::Qkd:
            return fmt::format("qkd/{}", tier_name);
        case MechanismKind::HybridXor:
            return fmt::format("hybrid-xor:{}/{}", algorithm, tier_name);
    }
    return "unknown";
}

double SwitchConfig::weight(Severity s) const {
    switch (s) {
        case Severity::Advisory:
            return weight_advisory;
        case Severity::Suspected:
            return weight_suspected;
        case Severity::Demonstrated:
            return weight_demonstrated;
    }
    return 0.0;
}

const LinkSwitchState& SwitchState::link(std::string_view id) const {
    for (const auto& l : links)
        if (l.link_id == id) return l;
    throw InvalidArgument(fmt::format("no switch state for link {}", id));
}

namespace {

void reject_unknown_keys(const json& obj, std::initializer_list<std::string_view> allowed, std::string_view where) {
    for (const auto& [key, _] : obj.items())
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
            throw ParseError(fmt::format("{}: unknown key \"{}\"", where, key));
}

double number_at(const json& obj, const char* key, std::string_view where) {
    const json& v = obj.at(key);
    if (!v.is_number()) throw ParseError(fmt::format("{}.{} must be a number", where, key));
    return v.get<double>();
}

std::string string_at(const json& obj, const char* key, std::string_view where) {
    auto it = obj.find(key);
    if (it == obj.end()) throw ParseError(fmt::format("{}: missing \"{}\"", where, key));
    if (!it->is_string()) throw ParseError(fmt::format("{}.{} must be a string", where, key));
    return it->get<std::string>();
}

json parse_json(std::string_view text, std::string_view what) {
    try {
        return json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
        throw ParseError(fmt::format("{}: syntax error: {}", what, e.what()), e.byte);
    }
}

}  // namespace

std::vector<ThreatEvent> parse_event_stream(std::string_view text) {
    std::vector<ThreatEvent> out;
    std::size_t line_no = 0, start = 0;
    while (start <= text.size()) {
        std::size_t end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = text.substr(start, end - start);
        ++line_no;
        start = end + 1;
        if (line.find_first_not_of(" \t\r") == std::string_view::npos) {
            if (end == text.size()) break;
            continue;
        }
        const std::string where = fmt::format("event line {}", line_no);
        json j = parse_json(line, where);
        if (!j.is_object()) throw ParseError(where + ": not a JSON object");
        reject_unknown_keys(j, {"event_id", "target", "severity", "model_time", "note"}, where);
        ThreatEvent e;
        e.event_id = string_at(j, "event_id", where);
        e.target = string_at(j, "target", where);
        if (e.target.empty()) throw ParseError(where + ": target must be nonempty");
        const std::string sev = string_at(j, "severity", where);
        if (sev == "Advisory")
            e.severity = Severity::Advisory;
        else if (sev == "Suspected")
            e.severity = Severity::Suspected;
        else if (sev == "Demonstrated")
            e.severity = Severity::Demonstrated;
        else
            throw ParseError(fmt::format("{}: unknown severity \"{}\"", where, sev));
        if (!j.contains("model_time")) throw ParseError(where + ": missing \"model_time\"");
        e.model_time = number_at(j, "model_time", where);
        if (!(e.model_time >= 0)) throw ParseError(where + ": model_time must be nonnegative");
        if (j.contains("note")) e.note = string_at(j, "note", where);
        out.push_back(std::move(e));
        if (end == text.size()) break;
    }
    return out;
}

void check_switch_config(const SwitchConfig& c) {
    const auto& t = c.thresholds;
    if (!(0 < t.extend && t.extend < t.migrate && t.migrate < t.quantum && t.quantum <= 1))
        throw InvalidArgument("thresholds must satisfy 0 < extend < migrate < quantum <= 1");
    if (!(t.hysteresis > 0)) throw InvalidArgument("hysteresis margin must be positive");
    for (double w : {c.weight_advisory, c.weight_suspected, c.weight_demonstrated})
        if (!(w >= 0)) throw InvalidArgument("severity weights must be nonnegative");
    if (!(c.half_life_s > 0)) throw InvalidArgument("half_life_s must be positive");
    if (!(c.tick_s >= 0)) throw InvalidArgument("tick_s must be nonnegative");
    if (c.horizon_s && !(*c.horizon_s >= 0)) throw InvalidArgument("horizon_s must be nonnegative");
}

SwitchConfig parse_switch_config(std::string_view text) {
    const json j = parse_json(text, "switch config");
    if (!j.is_object()) throw ParseError("switch config must be a JSON object");
    reject_unknown_keys(j,
                        {"thresholds", "severity_weights", "half_life_s", "quantum_mode", "qkd_label",
                         "pqc_alternatives", "tick_s", "horizon_s"},
                        "switch config");
    SwitchConfig c;
    if (auto it = j.find("thresholds"); it != j.end()) {
        reject_unknown_keys(*it, {"extend", "migrate", "quantum", "hysteresis"}, "thresholds");
        if (it->contains("extend")) c.thresholds.extend = number_at(*it, "extend", "thresholds");
        if (it->contains("migrate")) c.thresholds.migrate = number_at(*it, "migrate", "thresholds");
        if (it->contains("quantum")) c.thresholds.quantum = number_at(*it, "quantum", "thresholds");
        if (it->contains("hysteresis")) c.thresholds.hysteresis = number_at(*it, "hysteresis", "thresholds");
    }
    if (auto it = j.find("severity_weights"); it != j.end()) {
        reject_unknown_keys(*it, {"Advisory", "Suspected", "Demonstrated"}, "severity_weights");
        if (it->contains("Advisory")) c.weight_advisory = number_at(*it, "Advisory", "severity_weights");
        if (it->contains("Suspected")) c.weight_suspected = number_at(*it, "Suspected", "severity_weights");
        if (it->contains("Demonstrated")) c.weight_demonstrated = number_at(*it, "Demonstrated", "severity_weights");
    }
    if (j.contains("half_life_s")) c.half_life_s = number_at(j, "half_life_s", "switch config");
    if (j.contains("quantum_mode")) {
        const std::string mode = string_at(j, "quantum_mode", "switch config");
        if (mode == "qkd")
            c.quantum_uses_hybrid_xor = false;
        else if (mode == "hybrid-xor")
            c.quantum_uses_hybrid_xor = true;
        else
            throw ParseError(fmt::format("switch config: unknown quantum_mode \"{}\"", mode));
    }
    if (j.contains("qkd_label")) c.qkd_label = string_at(j, "qkd_label", "switch config");
    if (auto it = j.find("pqc_alternatives"); it != j.end()) {
        if (!it->is_array()) throw ParseError("switch config: pqc_alternatives must be an array");
        for (const auto& v : *it) {
            if (!v.is_string()) throw ParseError("switch config: pqc_alternatives entries must be strings");
            c.pqc_alternatives.push_back(v.get<std::string>());
        }
    }
    if (j.contains("tick_s")) c.tick_s = number_at(j, "tick_s", "switch config");
    if (j.contains("horizon_s")) c.horizon_s = number_at(j, "horizon_s", "switch config");
    check_switch_config(c);
    return c;
}

namespace {

// PQC labels a link may migrate to, in sorted order.
std::set<std::string> pqc_universe(const NetworkTopology& topology, const SwitchConfig& config) {
    std::set<std::string> labels(config.pqc_alternatives.begin(), config.pqc_alternatives.end());
    for (const Link& l : topology.links())
        if (const auto* k = l.kem()) labels.insert(k->algorithm_label);
    return labels;
}

// Lowest-risk label other than `exclude`; ties go to the smaller label.
std::optional<std::string> lowest_risk_alternative(const SwitchState& state, const std::set<std::string>& universe,
                                                   const std::string& exclude) {
    std::optional<std::string> best;
    for (const auto& label : universe) {
        if (label == exclude) continue;
        if (!best || state.risk_of(label) < state.risk_of(*best)) best = label;
    }
    return best;
}

int feasible_level(const LinkSwitchState& l, int demand) {
    if (l.kind == LinkKind::Qkd) return std::min(demand, 1);
    if (demand >= 3 && l.has_qkd_sibling) return 3;
    if (demand >= 2 && l.has_pqc_alternative) return 2;
    return std::min(demand, 1);
}

const std::array<const char*, 4> kLevelThresholdName{"", "extend", "migrate", "quantum"};

double threshold_for(const SwitchThresholds& t, int level) {
    switch (level) {
        case 1:
            return t.extend;
        case 2:
            return t.migrate;
        case 3:
            return t.quantum;
    }
    return 0.0;
}

}  // namespace

SwitchState initial_switch_state(const NetworkTopology& topology, const SwitchConfig& config) {
    check_switch_config(config);
    const auto universe = pqc_universe(topology, config);
    SwitchState s;
    for (const Link& l : topology.links()) {
        LinkSwitchState ls;
        ls.link_id = l.id;
        ls.kind = l.kind();
        if (const auto* k = l.kem()) {
            ls.risk_label = k->algorithm_label;
            ls.mode = LinkMode{MechanismKind::Pqc, k->algorithm_label, KeySizeTier::Standard};
            ls.has_pqc_alternative = std::any_of(universe.begin(), universe.end(),
                                                 [&](const std::string& u) { return u != k->algorithm_label; });
            for (const Link* p : topology.parallel_links(l))
                if (p->kind() == LinkKind::Qkd) ls.has_qkd_sibling = true;
        } else {
            ls.risk_label = config.qkd_label;
            ls.mode = LinkMode{MechanismKind::Qkd, "", KeySizeTier::Standard};
        }
        s.links.push_back(std::move(ls));
    }
    return s;
}

void advance_time(SwitchState& state, double t, const SwitchConfig& config) {
    if (t < state.model_time)
        throw InvalidArgument(fmt::format("cannot move model time backwards ({} -> {})", state.model_time, t));
    const double elapsed = t - state.model_time;
    if (elapsed > 0) {
        const double factor = std::exp2(-elapsed / config.half_life_s);
        for (auto& [_, r] : state.risk) r *= factor;
    }
    state.model_time = t;
}

void assess_risk(SwitchState& state, const ThreatEvent& event, const SwitchConfig& config) {
    if (event.target.empty()) throw InvalidArgument(fmt::format("event {} has an empty target", event.event_id));
    advance_time(state, event.model_time, config);
    const bool known = state.risk.count(event.target) > 0 || event.target == config.qkd_label ||
                       std::any_of(state.links.begin(), state.links.end(),
                                   [&](const LinkSwitchState& l) { return l.mode.algorithm == event.target ||
                                                                          l.risk_label == event.target; }) ||
                       std::find(config.pqc_alternatives.begin(), config.pqc_alternatives.end(), event.target) !=
                           config.pqc_alternatives.end();
    if (!known)
        state.warnings.push_back(
            fmt::format("event {} targets unknown mechanism label {}", event.event_id, event.target));
    double& r = state.risk[event.target];
    r = std::min(1.0, r + config.weight(event.severity));
}

std::vector<Transition> decide_switch(SwitchState& state, const NetworkTopology& topology, const SwitchConfig& config) {
    const auto& th = config.thresholds;
    const auto universe = pqc_universe(topology, config);
    std::vector<Transition> out;

    for (auto& l : state.links) {
        const double r = state.risk_of(l.risk_label);
        int up = 0, keep = 0;
        for (int k = 1; k <= 3; ++k) {
            if (r >= threshold_for(th, k)) up = k;
            if (r >= threshold_for(th, k) - th.hysteresis) keep = k;
        }
        const int demand = std::max(up, std::min(l.demand, keep));
        const int level = feasible_level(l, demand);

        LinkMode next = l.mode;
        std::string reason;
        if (level != l.level) {
            const std::string& home = l.risk_label;
            switch (level) {
                case 0:
                    next = l.kind == LinkKind::Kem ? LinkMode{MechanismKind::Pqc, home, KeySizeTier::Standard}
                                                   : LinkMode{MechanismKind::Qkd, "", KeySizeTier::Standard};
                    break;
                case 1:
                    next = l.kind == LinkKind::Kem ? LinkMode{MechanismKind::Pqc, home, KeySizeTier::Extended}
                                                   : LinkMode{MechanismKind::Qkd, "", KeySizeTier::Extended};
                    break;
                case 2:
                    next = LinkMode{MechanismKind::Pqc, *lowest_risk_alternative(state, universe, home),
                                    KeySizeTier::Extended};
                    break;
                case 3:
                    next = config.quantum_uses_hybrid_xor
                               ? LinkMode{MechanismKind::HybridXor, home, KeySizeTier::Extended}
                               : LinkMode{MechanismKind::Qkd, "", KeySizeTier::Extended};
                    break;
            }
            if (level > l.level)
                reason = fmt::format("risk({})={:.4f} >= {}={}", l.risk_label, r, kLevelThresholdName[level],
                                     threshold_for(th, level));
            else
                reason = fmt::format("risk({})={:.4f} < {}-h={}", l.risk_label, r, kLevelThresholdName[l.level],
                                     threshold_for(th, l.level) - th.hysteresis);
        } else if (level == 2 && state.risk_of(l.mode.algorithm) >= th.migrate) {
            // The alternative itself degraded; move again if something safer exists.
            auto alt = lowest_risk_alternative(state, universe, l.risk_label);
            if (alt && *alt != l.mode.algorithm && state.risk_of(*alt) < state.risk_of(l.mode.algorithm)) {
                next = LinkMode{MechanismKind::Pqc, *alt, KeySizeTier::Extended};
                reason = fmt::format("risk({})={:.4f} >= migrate={}; re-migrating", l.mode.algorithm,
                                     state.risk_of(l.mode.algorithm), th.migrate);
            }
        }

        if (next != l.mode) out.push_back({l.link_id, l.mode, next, reason, state.model_time, false});
        if (demand > l.demand && level < demand) {
            out.push_back({l.link_id, next, next,
                           fmt::format("alert: no alternative available at {} (risk({})={:.4f})",
                                       kLevelThresholdName[demand], l.risk_label, r),
                           state.model_time, true});
        }
        l.mode = next;
        l.demand = demand;
        l.level = level;
    }
    state.history.insert(state.history.end(), out.begin(), out.end());
    return out;
}

SwitchState replay(const std::vector<ThreatEvent>& events, const NetworkTopology& topology,
                   const SwitchConfig& config) {
    for (std::size_t i = 1; i < events.size(); ++i)
        if (events[i].model_time < events[i - 1].model_time)
            throw InvalidArgument(fmt::format("events not sorted by model_time: {} ({}) follows {} ({})",
                                              events[i].event_id, events[i].model_time, events[i - 1].event_id,
                                              events[i - 1].model_time));
    SwitchState state = initial_switch_state(topology, config);
    const double horizon = config.horizon_s.value_or(events.empty() ? 0.0 : events.back().model_time);

    std::size_t next_tick = 1;
    auto tick_time = [&](std::size_t k) { return static_cast<double>(k) * config.tick_s; };
    auto run_ticks_before = [&](double limit, bool inclusive) {
        if (config.tick_s <= 0) return;
        while (tick_time(next_tick) < limit || (inclusive && tick_time(next_tick) == limit)) {
            advance_time(state, tick_time(next_tick), config);
            decide_switch(state, topology, config);
            ++next_tick;
        }
    };

    for (const ThreatEvent& e : events) {
        run_ticks_before(e.model_time, false);
        assess_risk(state, e, config);
        decide_switch(state, topology, config);
        if (config.tick_s > 0)
            while (tick_time(next_tick) <= state.model_time) ++next_tick;
    }
    run_ticks_before(horizon, true);
    if (horizon > state.model_time) {
        advance_time(state, horizon, config);
        decide_switch(state, topology, config);
    }
    return state;
}

std::string transition_log_jsonl(const std::vector<Transition>& log) {
    std::string out;
    for (const auto& t : log) {
        nlohmann::ordered_json j{{"link_id", t.link_id},
                                 {"from", t.from.to_string()},
                                 {"to", t.to.to_string()},
                                 {"reason", t.reason},
                                 {"model_time", t.model_time}};
        out += j.dump() + "\n";
    }
    return out;
}

}  // namespace keynet
