#include "keynet/topology.hpp"

#include <algorithm>
#include <deque>
#include <set>
#include <unordered_set>

#include <fmt/format.h>
#include "json.hpp"

#include "keynet/error.hpp"

namespace keynet {

using nlohmann::json;

std::string_view to_string(NodeKind k) { return k == NodeKind::EndUser ? "EndUser" : "DataCenter"; }
std::string_view to_string(ComputeTier t) { return t == ComputeTier::Limited ? "Limited" : "HighPerformance"; }
std::string_view to_string(LinkKind k) { return k == LinkKind::Qkd ? "Qkd" : "Kem"; }
std::string_view to_string(ProtocolMode m) { return m == ProtocolMode::Repeaterless ? "Repeaterless" : "TwinField"; }

NetworkTopology::NetworkTopology(std::vector<Node> nodes, std::vector<Link> links, std::string alice, std::string bob)
    : nodes_(std::move(nodes)), links_(std::move(links)), alice_(std::move(alice)), bob_(std::move(bob)) {
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        if (nodes_[i].id.empty()) throw ParseError("node id must be nonempty");
        if (!node_index_.emplace(nodes_[i].id, i).second)
            throw ParseError(fmt::format("duplicate id {}", nodes_[i].id));
    }
    for (std::size_t i = 0; i < links_.size(); ++i) {
        const Link& l = links_[i];
        if (l.id.empty()) throw ParseError("link id must be nonempty");
        if (node_index_.count(l.id) || !link_index_.emplace(l.id, i).second)
            throw ParseError(fmt::format("duplicate id {}", l.id));
        for (const auto& end : l.endpoints)
            if (!node_index_.count(end)) throw ParseError(fmt::format("unknown node id {}", end));
    }
    if (!node_index_.count(alice_)) throw ParseError(fmt::format("unknown node id {}", alice_));
    if (!node_index_.count(bob_)) throw ParseError(fmt::format("unknown node id {}", bob_));
}

const Node* NetworkTopology::find_node(std::string_view id) const {
    auto it = node_index_.find(std::string(id));
    return it == node_index_.end() ? nullptr : &nodes_[it->second];
}

const Link* NetworkTopology::find_link(std::string_view id) const {
    auto it = link_index_.find(std::string(id));
    return it == link_index_.end() ? nullptr : &links_[it->second];
}

const Node& NetworkTopology::node(std::string_view id) const {
    if (const Node* n = find_node(id)) return *n;
    throw InvalidArgument(fmt::format("unknown node id {}", id));
}

const Link& NetworkTopology::link(std::string_view id) const {
    if (const Link* l = find_link(id)) return *l;
    throw InvalidArgument(fmt::format("unknown link id {}", id));
}

std::vector<const Link*> NetworkTopology::incident_links(std::string_view node) const {
    std::vector<const Link*> out;
    for (const Link& l : links_)
        if (l.touches(node)) out.push_back(&l);
    return out;
}

std::vector<const Link*> NetworkTopology::parallel_links(const Link& link) const {
    std::vector<const Link*> out;
    for (const Link& l : links_) {
        if (l.id == link.id) continue;
        if (l.touches(link.endpoints[0]) && l.touches(link.endpoints[1]) && l.endpoints[0] != l.endpoints[1])
            out.push_back(&l);
    }
    return out;
}

namespace {

void reject_unknown_keys(const json& obj, std::initializer_list<std::string_view> allowed, std::string_view where) {
    for (const auto& [key, _] : obj.items()) {
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
            throw ParseError(fmt::format("{}: unknown key \"{}\"", where, key));
    }
}

const json& require(const json& obj, const char* key, std::string_view where) {
    auto it = obj.find(key);
    if (it == obj.end()) throw ParseError(fmt::format("{}: missing \"{}\"", where, key));
    return *it;
}

std::string get_string(const json& v, std::string_view what) {
    if (!v.is_string()) throw ParseError(fmt::format("{} must be a string", what));
    return v.get<std::string>();
}

double get_number(const json& v, std::string_view what) {
    if (!v.is_number()) throw ParseError(fmt::format("{} must be a number", what));
    return v.get<double>();
}

std::optional<double> opt_number(const json& obj, const char* key, std::string_view where) {
    auto it = obj.find(key);
    if (it == obj.end()) return std::nullopt;
    return get_number(*it, fmt::format("{}.{}", where, key));
}

template <class Enum>
Enum parse_enum(const json& v, std::string_view what, std::initializer_list<std::pair<std::string_view, Enum>> table) {
    const std::string s = get_string(v, what);
    for (const auto& [name, value] : table)
        if (name == s) return value;
    throw ParseError(fmt::format("{}: unknown value \"{}\"", what, s));
}

Node parse_node(const json& j, std::size_t index) {
    const std::string where = fmt::format("nodes[{}]", index);
    if (!j.is_object()) throw ParseError(where + " must be an object");
    reject_unknown_keys(j, {"id", "kind", "compute_tier", "trust_weight"}, where);
    Node n;
    n.id = get_string(require(j, "id", where), where + ".id");
    n.kind = parse_enum<NodeKind>(require(j, "kind", where), where + ".kind",
                                  {{"EndUser", NodeKind::EndUser}, {"DataCenter", NodeKind::DataCenter}});
    n.compute_tier = n.kind == NodeKind::EndUser ? ComputeTier::Limited : ComputeTier::HighPerformance;
    if (auto it = j.find("compute_tier"); it != j.end())
        n.compute_tier = parse_enum<ComputeTier>(
            *it, where + ".compute_tier",
            {{"Limited", ComputeTier::Limited}, {"HighPerformance", ComputeTier::HighPerformance}});
    n.trust_weight = opt_number(j, "trust_weight", where).value_or(kDefaultTrustWeight);
    return n;
}

Link parse_link(const json& j, std::size_t index) {
    std::string where = fmt::format("links[{}]", index);
    if (!j.is_object()) throw ParseError(where + " must be an object");
    reject_unknown_keys(j,
                        {"id", "endpoints", "kind", "length_km", "loss_db_per_km", "protocol_mode",
                         "algorithm_label", "rtt_ms", "compromise_prob"},
                        where);
    Link l;
    l.id = get_string(require(j, "id", where), where + ".id");
    where = fmt::format("link {}", l.id);
    const json& ends = require(j, "endpoints", where);
    if (!ends.is_array() || ends.size() != 2) throw ParseError(where + ": endpoints must be an array of two node ids");
    l.endpoints = {get_string(ends[0], where + ".endpoints[0]"), get_string(ends[1], where + ".endpoints[1]")};
    const LinkKind kind = parse_enum<LinkKind>(require(j, "kind", where), where + ".kind",
                                               {{"Qkd", LinkKind::Qkd}, {"Kem", LinkKind::Kem}});
    auto forbid = [&](std::initializer_list<const char*> keys) {
        for (const char* k : keys)
            if (j.contains(k))
                throw ParseError(fmt::format("{}: field \"{}\" not allowed for kind {}", where, k, to_string(kind)));
    };
    if (kind == LinkKind::Qkd) {
        forbid({"algorithm_label", "rtt_ms"});
        QkdLinkParams q;
        q.length_km = get_number(require(j, "length_km", where), where + ".length_km");
        q.loss_db_per_km = opt_number(j, "loss_db_per_km", where).value_or(kDefaultLossDbPerKm);
        if (auto it = j.find("protocol_mode"); it != j.end())
            q.protocol_mode = parse_enum<ProtocolMode>(
                *it, where + ".protocol_mode",
                {{"Repeaterless", ProtocolMode::Repeaterless}, {"TwinField", ProtocolMode::TwinField}});
        l.params = q;
    } else {
        forbid({"length_km", "loss_db_per_km", "protocol_mode"});
        KemLinkParams k;
        k.algorithm_label = get_string(require(j, "algorithm_label", where), where + ".algorithm_label");
        k.rtt_ms = opt_number(j, "rtt_ms", where).value_or(0.0);
        l.params = k;
    }
    l.compromise_prob = opt_number(j, "compromise_prob", where).value_or(kDefaultCompromiseProb);
    return l;
}

}  // namespace

NetworkTopology parse_topology(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
        throw ParseError(fmt::format("syntax error: {}", e.what()), e.byte);
    }
    if (!doc.is_object()) throw ParseError("topology document must be a JSON object");
    reject_unknown_keys(doc, {"nodes", "links", "alice", "bob"}, "topology");

    const json& nodes_j = require(doc, "nodes", "topology");
    const json& links_j = require(doc, "links", "topology");
    if (!nodes_j.is_array()) throw ParseError("topology.nodes must be an array");
    if (!links_j.is_array()) throw ParseError("topology.links must be an array");
    if (!doc.contains("alice")) throw ParseError("missing alice");
    if (!doc.contains("bob")) throw ParseError("missing bob");

    std::vector<Node> nodes;
    for (std::size_t i = 0; i < nodes_j.size(); ++i) nodes.push_back(parse_node(nodes_j[i], i));
    std::vector<Link> links;
    for (std::size_t i = 0; i < links_j.size(); ++i) links.push_back(parse_link(links_j[i], i));

    return NetworkTopology(std::move(nodes), std::move(links), get_string(doc["alice"], "alice"),
                           get_string(doc["bob"], "bob"));
}

std::string serialize_topology(const NetworkTopology& t) {
    nlohmann::ordered_json doc;
    auto& nodes = doc["nodes"] = nlohmann::ordered_json::array();
    for (const Node& n : t.nodes()) {
        nodes.push_back({{"id", n.id},
                         {"kind", to_string(n.kind)},
                         {"compute_tier", to_string(n.compute_tier)},
                         {"trust_weight", n.trust_weight}});
    }
    auto& links = doc["links"] = nlohmann::ordered_json::array();
    for (const Link& l : t.links()) {
        nlohmann::ordered_json j{{"id", l.id}, {"endpoints", l.endpoints}, {"kind", to_string(l.kind())}};
        if (const auto* q = l.qkd()) {
            j["length_km"] = q->length_km;
            j["loss_db_per_km"] = q->loss_db_per_km;
            j["protocol_mode"] = to_string(q->protocol_mode);
        } else {
            const auto* k = l.kem();
            j["algorithm_label"] = k->algorithm_label;
            j["rtt_ms"] = k->rtt_ms;
        }
        j["compromise_prob"] = l.compromise_prob;
        links.push_back(std::move(j));
    }
    doc["alice"] = t.alice();
    doc["bob"] = t.bob();
    return doc.dump(2) + "\n";
}

std::vector<std::string> validate(const NetworkTopology& t) {
    std::vector<std::string> out;
    auto in_unit = [](double p) { return p >= 0.0 && p <= 1.0; };

    for (const Node& n : t.nodes())
        if (!in_unit(n.trust_weight))
            out.push_back(fmt::format("node {}: trust_weight {} outside [0,1]", n.id, n.trust_weight));

    for (const Link& l : t.links()) {
        if (l.endpoints[0] == l.endpoints[1]) out.push_back(fmt::format("link {}: endpoints must differ", l.id));
        if (!in_unit(l.compromise_prob))
            out.push_back(fmt::format("link {}: compromise_prob {} outside [0,1]", l.id, l.compromise_prob));
        if (const auto* q = l.qkd()) {
            if (!(q->length_km >= 0.0)) out.push_back(fmt::format("link {}: length_km must be nonnegative", l.id));
            if (!(q->loss_db_per_km >= 0.0))
                out.push_back(fmt::format("link {}: loss_db_per_km must be nonnegative", l.id));
        } else if (const auto* k = l.kem()) {
            if (!(k->rtt_ms >= 0.0)) out.push_back(fmt::format("link {}: rtt_ms must be nonnegative", l.id));
            if (k->algorithm_label.empty()) out.push_back(fmt::format("link {}: algorithm_label must be nonempty", l.id));
        }
    }

    if (t.alice() == t.bob()) {
        out.push_back("alice and bob must differ");
        return out;
    }
    for (const auto* who : {&t.alice(), &t.bob()}) {
        if (t.node(*who).kind != NodeKind::EndUser)
            out.push_back(fmt::format("{} node {} must be an EndUser", who == &t.alice() ? "alice" : "bob", *who));
    }

    // Breadth-first reachability from alice.
    std::unordered_set<std::string> seen{t.alice()};
    std::deque<std::string> frontier{t.alice()};
    while (!frontier.empty()) {
        const std::string cur = frontier.front();
        frontier.pop_front();
        for (const Link* l : t.incident_links(cur)) {
            const std::string& next = l->other_end(cur);
            if (seen.insert(next).second) frontier.push_back(next);
        }
    }
    if (!seen.count(t.bob())) out.push_back("no path alice→bob");
    return out;
}

std::vector<std::string> walk_path(const NetworkTopology& t, std::string_view from,
                                   const std::vector<std::string>& link_ids) {
    std::vector<std::string> nodes{std::string(from)};
    for (const std::string& id : link_ids) {
        const Link* l = t.find_link(id);
        if (!l) throw InvalidArgument(fmt::format("unknown link id {}", id));
        if (!l->touches(nodes.back()))
            throw InvalidArgument(fmt::format("path not contiguous at link {} (expected an endpoint at {})", id, nodes.back()));
        nodes.push_back(l->other_end(nodes.back()));
    }
    return nodes;
}

}  // namespace keynet
