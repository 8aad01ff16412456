#include "keynet/scenario.hpp"

#include <algorithm>

#include <fmt/format.h>

#include "json.hpp"
#include "keynet/error.hpp"

namespace keynet {

using nlohmann::json;

namespace {

void reject_unknown_keys(const json& obj, std::initializer_list<std::string_view> allowed, std::string_view where) {
    if (!obj.is_object()) throw ParseError(fmt::format("{} must be an object", where));
    for (const auto& [key, _] : obj.items())
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
            throw ParseError(fmt::format("{}: unknown key \"{}\"", where, key));
}

// Overwrites `target` when `key` is present; returns whether it was.
bool read_number(const json& obj, const char* key, double& target, std::string_view where) {
    auto it = obj.find(key);
    if (it == obj.end()) return false;
    if (!it->is_number()) throw ParseError(fmt::format("{}.{} must be a number", where, key));
    target = it->get<double>();
    return true;
}

std::string read_string(const json& v, std::string_view what) {
    if (!v.is_string()) throw ParseError(fmt::format("{} must be a string", what));
    return v.get<std::string>();
}

std::vector<std::string> read_path(const json& obj, std::string_view where) {
    auto it = obj.find("path");
    if (it == obj.end() || !it->is_array()) throw ParseError(fmt::format("{}: \"path\" must be an array", where));
    std::vector<std::string> out;
    for (const auto& v : *it) out.push_back(read_string(v, fmt::format("{}.path[]", where)));
    return out;
}

ProtocolMode read_mode(const json& v, std::string_view where) {
    const std::string s = read_string(v, where);
    if (s == "Repeaterless") return ProtocolMode::Repeaterless;
    if (s == "TwinField") return ProtocolMode::TwinField;
    throw ParseError(fmt::format("{}: unknown protocol_mode \"{}\"", where, s));
}

void read_optional(const json& obj, const char* key, std::optional<double>& target, std::string_view where) {
    double v = 0;
    if (read_number(obj, key, v, where)) target = v;
}

QkdRateOverride read_qkd_override(const json& j, std::string_view where) {
    reject_unknown_keys(j,
                        {"source_rate_hz", "protocol_efficiency", "loss_db_per_km", "length_km", "protocol_mode",
                         "cutoff_rate_hz"},
                        where);
    QkdRateOverride o;
    read_optional(j, "source_rate_hz", o.source_rate_hz, where);
    read_optional(j, "protocol_efficiency", o.protocol_efficiency, where);
    read_optional(j, "loss_db_per_km", o.loss_db_per_km, where);
    read_optional(j, "length_km", o.length_km, where);
    read_optional(j, "cutoff_rate_hz", o.cutoff_rate_hz, where);
    if (auto it = j.find("protocol_mode"); it != j.end()) o.protocol_mode = read_mode(*it, where);
    return o;
}

KemRateOverride read_kem_override(const json& j, std::string_view where) {
    reject_unknown_keys(j, {"handshakes_per_sec", "bits_per_handshake", "rtt_ms", "bandwidth_bits_per_sec"}, where);
    KemRateOverride o;
    read_optional(j, "handshakes_per_sec", o.handshakes_per_sec, where);
    read_optional(j, "bits_per_handshake", o.bits_per_handshake, where);
    read_optional(j, "rtt_ms", o.rtt_ms, where);
    read_optional(j, "bandwidth_bits_per_sec", o.bandwidth_bits_per_sec, where);
    return o;
}

void read_rates(const json& j, Scenario& s) {
    reject_unknown_keys(j, {"qkd", "kem", "links"}, "rates");
    RateConfig& r = s.rates;
    int set = 0;
    if (auto it = j.find("qkd"); it != j.end()) {
        reject_unknown_keys(*it, {"source_rate_hz", "protocol_efficiency", "cutoff_rate_hz", "loss_db_per_km"},
                            "rates.qkd");
        set += read_number(*it, "source_rate_hz", r.qkd_source_rate_hz, "rates.qkd");
        set += read_number(*it, "protocol_efficiency", r.qkd_protocol_efficiency, "rates.qkd");
        set += read_number(*it, "cutoff_rate_hz", r.qkd_cutoff_rate_hz, "rates.qkd");
        read_number(*it, "loss_db_per_km", s.sweep_loss_db_per_km, "rates.qkd");
    }
    if (auto it = j.find("kem"); it != j.end()) {
        reject_unknown_keys(*it, {"bits_per_handshake", "bandwidth_bits_per_sec", "handshakes_per_sec", "rtt_ms_per_km"},
                            "rates.kem");
        set += read_number(*it, "bits_per_handshake", r.kem_bits_per_handshake, "rates.kem");
        set += read_number(*it, "bandwidth_bits_per_sec", r.kem_bandwidth_bits_per_sec, "rates.kem");
        read_number(*it, "rtt_ms_per_km", r.kem_rtt_ms_per_km, "rates.kem");
        if (auto h = it->find("handshakes_per_sec"); h != it->end()) {
            reject_unknown_keys(*h, {"Limited", "HighPerformance"}, "rates.kem.handshakes_per_sec");
            set += read_number(*h, "Limited", r.kem_handshakes_limited, "rates.kem.handshakes_per_sec");
            set += read_number(*h, "HighPerformance", r.kem_handshakes_high_performance,
                               "rates.kem.handshakes_per_sec");
        }
    }
    s.rates_defaulted = set < 7;
    if (auto it = j.find("links"); it != j.end()) {
        if (!it->is_object()) throw ParseError("rates.links must be an object");
        for (const auto& [id, params] : it->items()) {
            const std::string where = fmt::format("rates.links.{}", id);
            reject_unknown_keys(params, {"qkd", "kem"}, where);
            if (params.size() != 1) throw ParseError(where + ": give exactly one of \"qkd\" or \"kem\"");
            if (params.contains("qkd"))
                r.link_overrides[id] = read_qkd_override(params["qkd"], where + ".qkd");
            else
                r.link_overrides[id] = read_kem_override(params["kem"], where + ".kem");
        }
    }
}

ProtocolConfig read_protocol(const json& j) {
    reject_unknown_keys(j, {"kind", "channels", "threshold", "field"}, "protocol");
    ProtocolConfig p;
    if (!j.contains("kind")) throw ParseError("protocol: missing \"kind\"");
    const std::string kind = read_string(j["kind"], "protocol.kind");
    if (kind == "series")
        p.kind = ProtocolKind::Series;
    else if (kind == "parallel_xor")
        p.kind = ProtocolKind::ParallelXor;
    else if (kind == "parallel_secret_sharing")
        p.kind = ProtocolKind::ParallelSecretSharing;
    else
        throw ParseError(fmt::format("protocol.kind: unknown value \"{}\"", kind));

    auto it = j.find("channels");
    if (it == j.end() || !it->is_array()) throw ParseError("protocol.channels must be an array");
    for (std::size_t i = 0; i < it->size(); ++i) {
        const std::string where = fmt::format("protocol.channels[{}]", i);
        const json& c = (*it)[i];
        reject_unknown_keys(c, {"id", "path"}, where);
        if (!c.contains("id")) throw ParseError(where + ": missing \"id\"");
        p.channels.push_back({read_string(c["id"], where + ".id"), read_path(c, where)});
    }
    if (auto t = j.find("threshold"); t != j.end()) {
        if (!t->is_number_unsigned()) throw ParseError("protocol.threshold must be a positive integer");
        p.threshold = t->get<unsigned>();
    }
    if (p.kind == ProtocolKind::ParallelSecretSharing && !j.contains("threshold"))
        throw ParseError("protocol: parallel_secret_sharing needs \"threshold\"");
    if (auto f = j.find("field"); f != j.end()) {
        const std::string field = read_string(*f, "protocol.field");
        if (field == "gf256")
            p.field = FieldTag::Gf256;
        else if (field == "gf16")
            p.field = FieldTag::Gf16;
        else if (field == "gf17")
            p.field = FieldTag::Gf17;
        else
            throw ParseError(fmt::format("protocol.field: unknown value \"{}\"", field));
    }
    return p;
}

}  // namespace

Scenario parse_scenario(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
        throw ParseError(fmt::format("scenario syntax error: {}", e.what()), e.byte);
    }
    reject_unknown_keys(doc,
                        {"rates", "rate_options", "crossovers", "protocol", "length_bits", "seed", "analysis"},
                        "scenario");
    Scenario s;
    if (auto it = doc.find("rates"); it != doc.end()) read_rates(*it, s);

    if (auto it = doc.find("rate_options"); it != doc.end()) {
        if (!it->is_array()) throw ParseError("rate_options must be an array");
        for (std::size_t i = 0; i < it->size(); ++i) {
            const std::string where = fmt::format("rate_options[{}]", i);
            const json& o = (*it)[i];
            reject_unknown_keys(o, {"name", "path"}, where);
            if (!o.contains("name")) throw ParseError(where + ": missing \"name\"");
            s.rate_options.push_back({read_string(o["name"], where + ".name"), read_path(o, where)});
        }
    }

    if (auto it = doc.find("crossovers"); it != doc.end()) {
        if (!it->is_array()) throw ParseError("crossovers must be an array");
        const QkdRateParams qkd_base{s.rates.qkd_source_rate_hz, s.rates.qkd_protocol_efficiency,
                                     s.sweep_loss_db_per_km,      0.0,
                                     ProtocolMode::Repeaterless,  s.rates.qkd_cutoff_rate_hz};
        const KemRateParams kem_base{s.rates.kem_handshakes_limited, s.rates.kem_bits_per_handshake, 0.0,
                                     s.rates.kem_bandwidth_bits_per_sec};
        for (std::size_t i = 0; i < it->size(); ++i) {
            const std::string where = fmt::format("crossovers[{}]", i);
            const json& c = (*it)[i];
            reject_unknown_keys(c, {"name", "qkd", "kem"}, where);
            CrossoverRequest req;
            req.name = c.contains("name") ? read_string(c["name"], where + ".name") : fmt::format("crossover-{}", i);
            req.qkd = c.contains("qkd") ? read_qkd_override(c["qkd"], where + ".qkd").applied_to(qkd_base) : qkd_base;
            req.kem = c.contains("kem") ? read_kem_override(c["kem"], where + ".kem").applied_to(kem_base) : kem_base;
            s.crossovers.push_back(std::move(req));
        }
    }

    if (auto it = doc.find("protocol"); it != doc.end()) s.protocol = read_protocol(*it);
    if (auto it = doc.find("length_bits"); it != doc.end()) {
        if (!it->is_number_unsigned()) throw ParseError("length_bits must be a positive integer");
        s.length_bits = it->get<std::size_t>();
    }
    if (auto it = doc.find("seed"); it != doc.end()) {
        if (!it->is_number_unsigned()) throw ParseError("seed must be a nonnegative integer");
        s.seed = it->get<std::uint64_t>();
    }
    if (auto it = doc.find("analysis"); it != doc.end()) {
        reject_unknown_keys(*it, {"access_structures", "break_probability"}, "analysis");
        for (auto [key, target] : {std::pair{"access_structures", &s.access_structures},
                                   std::pair{"break_probability", &s.break_probability}}) {
            if (auto v = it->find(key); v != it->end()) {
                if (!v->is_boolean()) throw ParseError(fmt::format("analysis.{} must be a boolean", key));
                *target = v->get<bool>();
            }
        }
    }
    return s;
}

}  // namespace keynet
