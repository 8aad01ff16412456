#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <variant>
#include <vector>

namespace keynet {

enum class NodeKind { EndUser, DataCenter };
enum class ComputeTier { Limited, HighPerformance };
enum class LinkKind { Qkd, Kem };
enum class ProtocolMode { Repeaterless, TwinField };

std::string_view to_string(NodeKind k);
std::string_view to_string(ComputeTier t);
std::string_view to_string(LinkKind k);
std::string_view to_string(ProtocolMode m);

inline constexpr double kDefaultLossDbPerKm = 0.2;
inline constexpr double kDefaultCompromiseProb = 0.0;
inline constexpr double kDefaultTrustWeight = 1.0;

struct Node {
    std::string id;
    NodeKind kind = NodeKind::EndUser;
    ComputeTier compute_tier = ComputeTier::Limited;
    // Probability the node resists compromise. Only used for reporting and
    // break-probability estimates (compromise probability = 1 - trust_weight).
    double trust_weight = kDefaultTrustWeight;

    bool operator==(const Node&) const = default;
};

struct QkdLinkParams {
    double length_km = 0.0;
    double loss_db_per_km = kDefaultLossDbPerKm;
    ProtocolMode protocol_mode = ProtocolMode::Repeaterless;

    bool operator==(const QkdLinkParams&) const = default;
};

struct KemLinkParams {
    std::string algorithm_label;
    double rtt_ms = 0.0;

    bool operator==(const KemLinkParams&) const = default;
};

struct Link {
    std::string id;
    std::array<std::string, 2> endpoints;
    std::variant<QkdLinkParams, KemLinkParams> params;
    double compromise_prob = kDefaultCompromiseProb;

    LinkKind kind() const noexcept {
        return std::holds_alternative<QkdLinkParams>(params) ? LinkKind::Qkd : LinkKind::Kem;
    }
    const QkdLinkParams* qkd() const noexcept { return std::get_if<QkdLinkParams>(&params); }
    const KemLinkParams* kem() const noexcept { return std::get_if<KemLinkParams>(&params); }
    bool touches(std::string_view node) const noexcept {
        return endpoints[0] == node || endpoints[1] == node;
    }
    // Endpoint opposite to `node`; undefined when the link does not touch it.
    const std::string& other_end(std::string_view node) const noexcept {
        return endpoints[0] == node ? endpoints[1] : endpoints[0];
    }

    bool operator==(const Link&) const = default;
};

// Immutable network description. Construction enforces referential integrity
// (unique ids, link endpoints and alice/bob name existing nodes); the remaining
// invariants are reported by validate().
class NetworkTopology {
public:
    NetworkTopology(std::vector<Node> nodes, std::vector<Link> links, std::string alice, std::string bob);

    const std::vector<Node>& nodes() const noexcept { return nodes_; }
    const std::vector<Link>& links() const noexcept { return links_; }
    const std::string& alice() const noexcept { return alice_; }
    const std::string& bob() const noexcept { return bob_; }

    const Node* find_node(std::string_view id) const;
    const Link* find_link(std::string_view id) const;
    const Node& node(std::string_view id) const;  // throws InvalidArgument
    const Link& link(std::string_view id) const;  // throws InvalidArgument

    bool is_node(std::string_view id) const { return find_node(id) != nullptr; }
    bool is_link(std::string_view id) const { return find_link(id) != nullptr; }

    // Links with an endpoint at `node`, in document order.
    std::vector<const Link*> incident_links(std::string_view node) const;
    // Links joining exactly the same node pair as `link` (excluding itself).
    std::vector<const Link*> parallel_links(const Link& link) const;

    bool operator==(const NetworkTopology& other) const {
        return nodes_ == other.nodes_ && links_ == other.links_ && alice_ == other.alice_ && bob_ == other.bob_;
    }

private:
    std::vector<Node> nodes_;
    std::vector<Link> links_;
    std::string alice_;
    std::string bob_;
    std::unordered_map<std::string, std::size_t> node_index_;
    std::unordered_map<std::string, std::size_t> link_index_;
};

// Strict JSON topology document: unknown keys, duplicate ids, dangling
// references and kind/field mismatches all raise ParseError.
NetworkTopology parse_topology(std::string_view text);

// Canonical JSON rendering with every field explicit; parse_topology
// reproduces the value exactly.
std::string serialize_topology(const NetworkTopology& topology);

// Empty iff every topology invariant holds. Each entry names the offending
// element.
std::vector<std::string> validate(const NetworkTopology& topology);

// Node ids along a path of links starting at `from`. Throws InvalidArgument
// naming the first link that does not continue the walk.
std::vector<std::string> walk_path(const NetworkTopology& topology, std::string_view from,
                                   const std::vector<std::string>& link_ids);

}  // namespace keynet
