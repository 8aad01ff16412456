#include "keynet/cli.hpp"

#include <charconv>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <fmt/format.h>

#include "CLI11.hpp"
#include "json.hpp"
#include "keynet/access_analysis.hpp"
#include "keynet/digest.hpp"
#include "keynet/error.hpp"
#include "keynet/protocols.hpp"
#include "keynet/rate_models.hpp"
#include "keynet/scenario.hpp"
#include "keynet/switch_policy.hpp"
#include "keynet/topology.hpp"

namespace keynet::cli {
namespace {

using Json = nlohmann::ordered_json;

// Usage problems detected after CLI11 parsing (bad --sweep, csv without sweep).
class UsageError : public Error {
public:
    using Error::Error;
};

// A command failed on domain grounds but still has a report to emit.
struct Outcome {
    Json report;
    int code = kSuccess;
};

struct Options {
    std::optional<std::uint64_t> seed;
    std::string output;
    std::string format = "json";
    bool reveal_secrets = false;
    std::string sweep;
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(fmt::format("cannot read {}", path));
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad()) throw IoError(fmt::format("error reading {}", path));
    return ss.str();
}

Json report_header(std::string_view command, Json inputs) {
    Json r;
    r["schema"] = kReportSchema;
    r["tool_version"] = kToolVersion;
    r["command"] = command;
    r["inputs"] = std::move(inputs);
    return r;
}

std::string hex(const std::vector<std::uint8_t>& bytes) { return to_hex(bytes.data(), bytes.size()); }

NetworkTopology load_valid_topology(const std::string& text) {
    NetworkTopology t = parse_topology(text);
    if (auto v = validate(t); !v.empty()) {
        std::string msg = "invalid topology:";
        for (const auto& line : v) msg += "\n  " + line;
        throw InvalidArgument(msg);
    }
    return t;
}

struct SweepSpec {
    double from, to, step;
};

SweepSpec parse_sweep(const std::string& s) {
    // <from>..<to>:<step>
    const auto dots = s.find("..");
    const auto colon = s.find(':', dots == std::string::npos ? 0 : dots);
    auto num = [&](std::string_view part) {
        double v = 0;
        auto [p, ec] = std::from_chars(part.data(), part.data() + part.size(), v);
        if (part.empty() || ec != std::errc{} || p != part.data() + part.size())
            throw UsageError(fmt::format("--sweep: expected <from>..<to>:<step>, got \"{}\"", s));
        return v;
    };
    if (dots == std::string::npos || colon == std::string::npos)
        throw UsageError(fmt::format("--sweep: expected <from>..<to>:<step>, got \"{}\"", s));
    const std::string_view sv(s);
    SweepSpec spec{num(sv.substr(0, dots)), num(sv.substr(dots + 2, colon - dots - 2)), num(sv.substr(colon + 1))};
    if (!(spec.step > 0) || !(spec.from >= 0) || !(spec.to >= spec.from))
        throw UsageError(fmt::format("--sweep: need 0 <= from <= to and step > 0, got \"{}\"", s));
    return spec;
}

Json rate_params_json(const LinkRateParams& p) {
    if (const auto* q = std::get_if<QkdRateParams>(&p)) {
        return Json{{"source_rate_hz", q->source_rate_hz},
                    {"protocol_efficiency", q->protocol_efficiency},
                    {"loss_db_per_km", q->loss_db_per_km},
                    {"length_km", q->length_km},
                    {"protocol_mode", to_string(q->protocol_mode)},
                    {"cutoff_rate_hz", q->cutoff_rate_hz}};
    }
    const auto& k = std::get<KemRateParams>(p);
    return Json{{"handshakes_per_sec", k.handshakes_per_sec},
                {"bits_per_handshake", k.bits_per_handshake},
                {"rtt_ms", k.rtt_ms},
                {"bandwidth_bits_per_sec", k.bandwidth_bits_per_sec}};
}

constexpr const char* kIllustrativeWarning =
    "rate parameters not given in the scenario use illustrative defaults, not measured values";

// ---- validate -------------------------------------------------------------

Outcome cmd_validate(const std::string& topology_path, std::ostream& err) {
    const std::string text = read_file(topology_path);
    Outcome o{report_header("validate", Json{{"topology_sha256", sha256_hex(text)}})};
    std::vector<std::string> violations;
    try {
        violations = validate(parse_topology(text));
    } catch (const ParseError& e) {
        violations.push_back(e.what());
    }
    for (const auto& v : violations) err << v << '\n';
    o.report["valid"] = violations.empty();
    o.report["violations"] = violations;
    o.code = violations.empty() ? kSuccess : kDomainFailure;
    return o;
}

// ---- rate -----------------------------------------------------------------

Outcome cmd_rate(const std::string& topology_path, const std::string& scenario_path, const Options& opt,
                 std::string* csv) {
    const std::string ttext = read_file(topology_path);
    const std::string stext = read_file(scenario_path);
    std::optional<SweepSpec> sweep;
    if (!opt.sweep.empty()) sweep = parse_sweep(opt.sweep);
    if (opt.format == "csv" && !sweep) throw UsageError("--format csv is only available with --sweep");

    const NetworkTopology topology = load_valid_topology(ttext);
    const Scenario scenario = parse_scenario(stext);
    const RateAssignment rates = assign_rates(topology, scenario.rates);

    Outcome o{report_header("rate", Json{{"topology_sha256", sha256_hex(ttext)}, {"scenario_sha256", sha256_hex(stext)}})};
    Json section;
    Json links = Json::array();
    for (const Link& l : topology.links()) {
        const auto& p = rates.at(l.id);
        links.push_back({{"link_id", l.id},
                         {"kind", to_string(l.kind())},
                         {"rate_bps", link_rate(p)},
                         {"params", rate_params_json(p)}});
    }
    section["links"] = std::move(links);

    Json options = Json::array();
    std::optional<std::pair<std::string, double>> fastest;
    for (const auto& opt_route : scenario.rate_options) {
        const double r = end_to_end_rate(topology, opt_route.path, rates);
        options.push_back({{"name", opt_route.name}, {"path", opt_route.path}, {"rate_bps", r}});
        if (!fastest || r > fastest->second) fastest = {opt_route.name, r};
    }
    section["options"] = std::move(options);
    section["fastest_option"] = fastest ? Json(fastest->first) : Json(nullptr);

    Json cross = Json::array();
    for (const auto& c : scenario.crossovers) {
        const auto res = crossover_distance(c.qkd, c.kem);
        Json entry{{"name", c.name},
                   {"qkd_zero_distance_bps", [&] {
                        QkdRateParams q = c.qkd;
                        q.length_km = 0;
                        return qkd_rate(q);
                    }()},
                   {"kem_bps", kem_rate(c.kem)}};
        entry["distance_km"] = res.distance_km ? Json(*res.distance_km) : Json(nullptr);
        if (!res.distance_km) entry["reason"] = res.reason;
        cross.push_back(std::move(entry));
    }
    section["crossovers"] = std::move(cross);

    if (sweep) {
        const auto rows = rate_sweep(scenario.rates, scenario.sweep_loss_db_per_km, sweep->from, sweep->to, sweep->step);
        Json table = Json::array();
        std::string text = "distance_km,qkd_repeaterless_bps,qkd_twin_field_bps,kem_limited_bps,kem_high_performance_bps\n";
        for (const auto& r : rows) {
            table.push_back({{"distance_km", r.distance_km},
                             {"qkd_repeaterless_bps", r.qkd_repeaterless},
                             {"qkd_twin_field_bps", r.qkd_twin_field},
                             {"kem_limited_bps", r.kem_limited},
                             {"kem_high_performance_bps", r.kem_high_performance}});
            text += fmt::format("{},{},{},{},{}\n", r.distance_km, r.qkd_repeaterless, r.qkd_twin_field,
                                r.kem_limited, r.kem_high_performance);
        }
        section["sweep"] = std::move(table);
        if (csv) *csv = std::move(text);
    }
    o.report["rates"] = std::move(section);
    Json warnings = Json::array();
    if (scenario.rates_defaulted) warnings.push_back(kIllustrativeWarning);
    o.report["warnings"] = std::move(warnings);
    return o;
}

// ---- simulate ---------------------------------------------------------------

Json protocol_json(const ProtocolConfig& p) {
    Json j{{"kind", to_string(p.kind)}};
    Json chans = Json::array();
    for (const auto& c : p.channels) chans.push_back({{"id", c.id}, {"path", c.path}});
    j["channels"] = std::move(chans);
    if (p.kind == ProtocolKind::ParallelSecretSharing) {
        j["threshold"] = p.threshold;
        j["field"] = p.field == FieldTag::Gf256 ? "gf256" : p.field == FieldTag::Gf16 ? "gf16" : "gf17";
    }
    return j;
}

Outcome cmd_simulate(const std::string& topology_path, const std::string& scenario_path, const Options& opt) {
    const std::string ttext = read_file(topology_path);
    const std::string stext = read_file(scenario_path);
    const NetworkTopology topology = load_valid_topology(ttext);
    const Scenario scenario = parse_scenario(stext);
    if (!scenario.protocol) throw InvalidArgument("scenario has no protocol to simulate");
    const std::optional<std::uint64_t> seed = opt.seed ? opt.seed : scenario.seed;
    if (!seed) throw InvalidArgument("scenario requests a protocol run but gives no seed");
    const ProtocolConfig& protocol = *scenario.protocol;
    check_protocol(topology, protocol);

    Outcome o{report_header("simulate",
                            Json{{"topology_sha256", sha256_hex(ttext)}, {"scenario_sha256", sha256_hex(stext)}})};
    Json session{{"protocol", protocol_json(protocol)}, {"seed", *seed}, {"length_bits", scenario.length_bits}};

    Json warnings = Json::array();
    if (protocol.kind != ProtocolKind::Series)
        for (auto& w : shared_element_warnings(topology, protocol.channels)) warnings.push_back(std::move(w));
    if (scenario.rates_defaulted) warnings.push_back(kIllustrativeWarning);

    SeededKeySource source(*seed);
    try {
        const SessionResult r =
            run_protocol(topology, protocol, scenario.length_bits, assign_rates(topology, scenario.rates), source);
        session["status"] = "ok";
        session["keys_match"] = r.keys_match();
        session["key_length_bits"] = r.alice_key.length_bits();
        session["elapsed_model_time_s"] = r.elapsed_model_time;
        session["transcript_messages"] = r.transcript.size();
        session["transcript_bytes"] = r.transcript_bytes();
        Json delivered = Json::array(), dead = Json::array();
        for (const auto& c : r.channels) {
            if (c.delivered)
                delivered.push_back(c.channel);
            else
                dead.push_back({{"channel", c.channel}, {"reason", c.failure}});
        }
        session["delivered_channels"] = std::move(delivered);
        session["dead_channels"] = std::move(dead);
        Json drawn = Json::object();
        for (const auto& [id, n] : r.link_bytes_drawn) drawn[id] = 8 * n;
        session["link_key_bits_consumed"] = std::move(drawn);
        if (opt.reveal_secrets) {
            session["alice_key"] = hex(r.alice_key.bytes());
            session["bob_key"] = hex(r.bob_key.bytes());
            Json transcript = Json::array();
            for (const auto& m : r.transcript)
                transcript.push_back({{"sender", m.sender},
                                      {"channel", m.channel},
                                      {"kind", m.kind == MessageKind::RelayXor ? "relay_xor" : "share_ciphertext"},
                                      {"payload", hex(m.payload)}});
            session["transcript"] = std::move(transcript);
            Json segs = Json::object();
            for (const auto& c : r.channels) {
                Json keys = Json::array();
                for (const auto& k : c.segment_keys) keys.push_back(hex(k.bytes()));
                segs[c.channel] = std::move(keys);
            }
            session["segment_keys"] = std::move(segs);
        } else {
            session["alice_key"] = "<redacted>";
            session["bob_key"] = "<redacted>";
        }
        if (!r.keys_match()) o.code = kDomainFailure;
    } catch (const ProtocolAbort& e) {
        session["status"] = "aborted";
        session["reason"] = e.what();
        session["failed_element"] = e.element_id();
        o.code = kDomainFailure;
    }
    o.report["session"] = std::move(session);
    o.report["warnings"] = std::move(warnings);
    return o;
}

// ---- analyze ----------------------------------------------------------------

Outcome cmd_analyze(const std::string& topology_path, const std::string& scenario_path) {
    const std::string ttext = read_file(topology_path);
    const std::string stext = read_file(scenario_path);
    const NetworkTopology topology = load_valid_topology(ttext);
    const Scenario scenario = parse_scenario(stext);
    if (!scenario.protocol) throw InvalidArgument("scenario has no protocol to analyze");
    std::size_t bound = 0;
    try {
        bound = max_leaves_from_env();
    } catch (const InvalidArgument& e) {
        throw UsageError(e.what());
    }

    Outcome o{report_header("analyze",
                            Json{{"topology_sha256", sha256_hex(ttext)}, {"scenario_sha256", sha256_hex(stext)}})};
    const AccessFormula formula = derive_access_formula(topology, *scenario.protocol);
    Json access{{"protocol", protocol_json(*scenario.protocol)},
                {"formula", formula.to_string()},
                {"leaf_count", formula.leaves().size()}};
    Json warnings = Json::array();
    if (scenario.protocol->kind != ProtocolKind::Series)
        for (auto& w : shared_element_warnings(topology, scenario.protocol->channels)) warnings.push_back(std::move(w));

    if (scenario.access_structures || scenario.break_probability) {
        try {
            const AccessStructureSet s = minimal_access_structures(formula, bound);
            access["status"] = "ok";
            access["minimal_sets"] = s.minimal_sets;
            Json ranking = Json::array();
            for (const auto& [id, count] : criticality_ranking(s)) ranking.push_back({{"element", id}, {"count", count}});
            access["criticality"] = std::move(ranking);
            const auto rank = criticality_ranking(s);
            access["most_critical"] = rank.empty() ? Json(nullptr) : Json(rank.front().first);
            if (scenario.break_probability) access["break_probability"] = break_probability(s, topology).probability;
        } catch (const AnalysisError& e) {
            access["status"] = "failed";
            access["reason"] = e.what();
            o.code = kDomainFailure;
        }
    }
    o.report["access"] = std::move(access);
    o.report["warnings"] = std::move(warnings);
    return o;
}

// ---- switch -----------------------------------------------------------------

Outcome cmd_switch(const std::string& topology_path, const std::string& events_path, const std::string& config_path) {
    const std::string ttext = read_file(topology_path);
    const std::string etext = read_file(events_path);
    const std::string ctext = config_path.empty() ? std::string() : read_file(config_path);
    const NetworkTopology topology = load_valid_topology(ttext);
    const SwitchConfig config = config_path.empty() ? SwitchConfig{} : parse_switch_config(ctext);
    const auto events = parse_event_stream(etext);

    Json inputs{{"topology_sha256", sha256_hex(ttext)}, {"events_sha256", sha256_hex(etext)}};
    inputs["config_sha256"] = config_path.empty() ? Json(nullptr) : Json(sha256_hex(ctext));
    Outcome o{report_header("switch", std::move(inputs))};

    const SwitchState state = replay(events, topology, config);
    Json log = Json::array();
    std::size_t alerts = 0;
    for (const auto& t : state.history) {
        log.push_back({{"link_id", t.link_id},
                       {"from", t.from.to_string()},
                       {"to", t.to.to_string()},
                       {"reason", t.reason},
                       {"model_time", t.model_time}});
        alerts += t.alert;
    }
    Json final_state = Json::array();
    for (const auto& l : state.links)
        final_state.push_back({{"link_id", l.link_id}, {"mode", l.mode.to_string()}, {"protection_level", l.level}});
    Json risk = Json::object();
    for (const auto& [label, r] : state.risk) risk[label] = r;
    o.report["switch"] = Json{{"events", events.size()},
                              {"model_time", state.model_time},
                              {"transitions", std::move(log)},
                              {"alerts", alerts},
                              {"final_state", std::move(final_state)},
                              {"risk", std::move(risk)}};
    o.report["warnings"] = state.warnings;
    return o;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Hybrid QKD/PQC key-distribution network simulator and analyzer", "keynet"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kToolVersion);

    Options opt;
    std::uint64_t seed = 0;
    auto* seed_opt = app.add_option("--seed", seed, "Seed for protocol randomness (overrides the scenario)");
    app.add_option("--output", opt.output, "Write the report to this file instead of stdout");
    app.add_option("--format", opt.format, "Report format")->check(CLI::IsMember({"json", "csv"}));
    app.add_flag("--reveal-secrets", opt.reveal_secrets, "Include keys and transcript payloads in reports");
    app.add_option("--sweep", opt.sweep, "Rate-vs-distance table, <from>..<to>:<step> in km");

    std::string topology, scenario, events, config;
    auto* validate_cmd = app.add_subcommand("validate", "Check a topology document");
    validate_cmd->add_option("topology", topology, "Topology JSON")->required();
    auto* rate_cmd = app.add_subcommand("rate", "Per-link and end-to-end key rates");
    rate_cmd->add_option("topology", topology, "Topology JSON")->required();
    rate_cmd->add_option("scenario", scenario, "Scenario JSON")->required();
    auto* simulate_cmd = app.add_subcommand("simulate", "Run the configured key-distribution protocol");
    simulate_cmd->add_option("topology", topology, "Topology JSON")->required();
    simulate_cmd->add_option("scenario", scenario, "Scenario JSON")->required();
    auto* analyze_cmd = app.add_subcommand("analyze", "Minimal access structures and break probability");
    analyze_cmd->add_option("topology", topology, "Topology JSON")->required();
    analyze_cmd->add_option("scenario", scenario, "Scenario JSON")->required();
    auto* switch_cmd = app.add_subcommand("switch", "Replay threat events through the switch policy");
    switch_cmd->add_option("topology", topology, "Topology JSON")->required();
    switch_cmd->add_option("events", events, "Threat events, one JSON object per line")->required();
    switch_cmd->add_option("config", config, "Switch policy JSON (defaults when omitted)");
    for (auto* sub : {validate_cmd, rate_cmd, simulate_cmd, analyze_cmd, switch_cmd}) sub->fallthrough();

    std::vector<std::string> argv_store{"keynet"};
    argv_store.insert(argv_store.end(), args.begin(), args.end());
    std::vector<char*> argv;
    for (auto& a : argv_store) argv.push_back(a.data());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kSuccess;
    } catch (const CLI::CallForVersion&) {
        out << kToolVersion << '\n';
        return kSuccess;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kUsageOrIo;
    }
    if (seed_opt->count()) opt.seed = seed;

    Outcome outcome;
    std::string csv;
    try {
        if (*validate_cmd)
            outcome = cmd_validate(topology, err);
        else if (*rate_cmd)
            outcome = cmd_rate(topology, scenario, opt, &csv);
        else if (*simulate_cmd)
            outcome = cmd_simulate(topology, scenario, opt);
        else if (*analyze_cmd)
            outcome = cmd_analyze(topology, scenario);
        else
            outcome = cmd_switch(topology, events, config);
        if (opt.format == "csv" && !*rate_cmd) throw UsageError("--format csv is only available for rate --sweep");
    } catch (const IoError& e) {
        err << "error: " << e.what() << '\n';
        return kUsageOrIo;
    } catch (const UsageError& e) {
        err << "error: " << e.what() << '\n';
        return kUsageOrIo;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kDomainFailure;
    }

    const std::string body = opt.format == "csv" ? csv : outcome.report.dump(2) + "\n";
    if (opt.output.empty()) {
        out << body;
    } else {
        std::ofstream file(opt.output, std::ios::binary | std::ios::trunc);
        if (!(file << body)) {
            err << "error: cannot write " << opt.output << '\n';
            return kUsageOrIo;
        }
    }
    return outcome.code;
}

}  // namespace keynet::cli
