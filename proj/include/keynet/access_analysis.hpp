#pragma once

#include <cstddef>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "keynet/protocols.hpp"
#include "keynet/topology.hpp"

namespace keynet {

// Monotone compromise logic over network element ids (links and relay
// nodes). A formula is true for a compromise set iff that set reveals the
// final key.
class AccessFormula {
public:
    enum class Op { Leaf, And, Or, Threshold };

    static AccessFormula leaf(std::string element);
    // A single child collapses to that child.
    static AccessFormula all_of(std::vector<AccessFormula> children);
    static AccessFormula any_of(std::vector<AccessFormula> children);
    static AccessFormula at_least(unsigned threshold, std::vector<AccessFormula> children);

    Op op() const noexcept { return op_; }
    const std::string& element() const noexcept { return element_; }
    unsigned threshold() const noexcept { return threshold_; }
    const std::vector<AccessFormula>& children() const noexcept { return children_; }

    // Distinct leaf element ids, sorted.
    std::set<std::string> leaves() const;
    // e.g. "THRESHOLD(2,OR(q1,D1),q2,q3)"
    std::string to_string() const;

    bool operator==(const AccessFormula&) const = default;

private:
    AccessFormula() = default;

    Op op_ = Op::Leaf;
    std::string element_;
    unsigned threshold_ = 0;
    std::vector<AccessFormula> children_;
};

// Structural problems: empty gates, threshold out of 1..children, and (when a
// topology is given) leaves that are not topology elements.
std::vector<std::string> check_formula(const AccessFormula& formula, const NetworkTopology* topology = nullptr);

bool evaluate(const AccessFormula& formula, const std::set<std::string>& compromised);

// Compromise logic of a protocol deployment. A channel falls to any of its
// links or relay nodes (the transcript is public, so one segment key gives
// the channel key); parallel XOR needs every channel; t-of-n sharing needs
// any t. Alice and bob never appear as leaves.
AccessFormula derive_access_formula(const NetworkTopology& topology, const ProtocolConfig& config);

inline constexpr std::size_t kDefaultMaxLeaves = 24;
inline constexpr std::size_t kMaxBreakProbabilityElements = 20;

// Leaf bound from HYBRID_KEYNET_MAX_LEAVES, or the default. Throws
// InvalidArgument on a malformed value or one above 64.
std::size_t max_leaves_from_env();

struct AccessStructureSet {
    // Inclusion-minimal compromise sets, each sorted; ordered by size then
    // lexicographically.
    std::vector<std::vector<std::string>> minimal_sets;
    // Number of minimal sets containing each element.
    std::map<std::string, std::size_t> element_criticality;

    bool satisfiable() const noexcept { return !minimal_sets.empty(); }
    bool operator==(const AccessStructureSet&) const = default;
};

// Bottom-up expansion with absorption. Throws AnalysisError when the formula
// has more distinct leaves than `max_leaves`.
AccessStructureSet minimal_access_structures(const AccessFormula& formula, std::size_t max_leaves = kDefaultMaxLeaves);

// Elements by descending criticality, ties by id.
std::vector<std::pair<std::string, std::size_t>> criticality_ranking(const AccessStructureSet& structures);

struct BreakAnalysis {
    double probability = 0.0;
    std::map<std::string, std::size_t> element_criticality;
    std::string most_critical;  // empty when there are no minimal sets
};

// Element compromise probability: compromise_prob for links, 1 - trust_weight
// for nodes.
double compromise_probability(const NetworkTopology& topology, const std::string& element);

// Exact probability that independently compromised elements cover some
// minimal set, by enumeration over at most 20 elements.
BreakAnalysis break_probability(const AccessStructureSet& structures, const NetworkTopology& topology);

}  // namespace keynet
