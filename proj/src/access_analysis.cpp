#include "keynet/access_analysis.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cstdint>
#include <cstdlib>
#include <string_view>

#include <fmt/format.h>

#include "keynet/error.hpp"

namespace keynet {

AccessFormula AccessFormula::leaf(std::string element) {
    AccessFormula f;
    f.op_ = Op::Leaf;
    f.element_ = std::move(element);
    return f;
}

AccessFormula AccessFormula::all_of(std::vector<AccessFormula> children) {
    if (children.size() == 1) return std::move(children.front());
    AccessFormula f;
    f.op_ = Op::And;
    f.children_ = std::move(children);
    return f;
}

AccessFormula AccessFormula::any_of(std::vector<AccessFormula> children) {
    if (children.size() == 1) return std::move(children.front());
    AccessFormula f;
    f.op_ = Op::Or;
    f.children_ = std::move(children);
    return f;
}

AccessFormula AccessFormula::at_least(unsigned threshold, std::vector<AccessFormula> children) {
    AccessFormula f;
    f.op_ = Op::Threshold;
    f.threshold_ = threshold;
    f.children_ = std::move(children);
    return f;
}

std::set<std::string> AccessFormula::leaves() const {
    std::set<std::string> out;
    if (op_ == Op::Leaf) {
        out.insert(element_);
        return out;
    }
    for (const auto& c : children_) {
        auto sub = c.leaves();
        out.insert(sub.begin(), sub.end());
    }
    return out;
}

std::string AccessFormula::to_string() const {
    if (op_ == Op::Leaf) return element_;
    std::string s;
    switch (op_) {
        case Op::And:
            s = "AND(";
            break;
        case Op::Or:
            s = "OR(";
            break;
        default:
            s = fmt::format("THRESHOLD({},", threshold_);
            break;
    }
    for (std::size_t i = 0; i < children_.size(); ++i) s += (i ? "," : "") + children_[i].to_string();
    return s + ")";
}

std::vector<std::string> check_formula(const AccessFormula& f, const NetworkTopology* topology) {
    std::vector<std::string> out;
    auto visit = [&](const AccessFormula& node, auto&& self) -> void {
        using Op = AccessFormula::Op;
        if (node.op() == Op::Leaf) {
            if (node.element().empty()) out.push_back("empty leaf id");
            else if (topology && !topology->is_link(node.element()) && !topology->is_node(node.element()))
                out.push_back(fmt::format("leaf {} is not a topology element", node.element()));
            return;
        }
        if (node.children().empty()) out.push_back("gate without children");
        if (node.op() == Op::Threshold && (node.threshold() < 1 || node.threshold() > node.children().size()))
            out.push_back(fmt::format("threshold {} outside 1..{}", node.threshold(), node.children().size()));
        for (const auto& c : node.children()) self(c, self);
    };
    visit(f, visit);
    return out;
}

bool evaluate(const AccessFormula& f, const std::set<std::string>& compromised) {
    using Op = AccessFormula::Op;
    switch (f.op()) {
        case Op::Leaf:
            return compromised.count(f.element()) > 0;
        case Op::And:
            return std::all_of(f.children().begin(), f.children().end(),
                               [&](const AccessFormula& c) { return evaluate(c, compromised); });
        case Op::Or:
            return std::any_of(f.children().begin(), f.children().end(),
                               [&](const AccessFormula& c) { return evaluate(c, compromised); });
        case Op::Threshold: {
            unsigned hits = 0;
            for (const auto& c : f.children())
                if (evaluate(c, compromised) && ++hits >= f.threshold()) return true;
            return false;
        }
    }
    return false;
}

namespace {

AccessFormula channel_formula(const NetworkTopology& topology, const Channel& channel) {
    const auto nodes = walk_path(topology, topology.alice(), channel.path);
    std::vector<AccessFormula> leaves;
    std::set<std::string> seen;
    auto add = [&](const std::string& id) {
        if (id == topology.alice() || id == topology.bob()) return;
        if (seen.insert(id).second) leaves.push_back(AccessFormula::leaf(id));
    };
    for (const auto& l : channel.path) add(l);
    for (std::size_t i = 1; i + 1 < nodes.size(); ++i) add(nodes[i]);
    return AccessFormula::any_of(std::move(leaves));
}

}  // namespace

AccessFormula derive_access_formula(const NetworkTopology& topology, const ProtocolConfig& config) {
    check_protocol(topology, config);
    std::vector<AccessFormula> per_channel;
    for (const Channel& c : config.channels) per_channel.push_back(channel_formula(topology, c));
    switch (config.kind) {
        case ProtocolKind::Series:
            return std::move(per_channel.front());
        case ProtocolKind::ParallelXor:
            return AccessFormula::all_of(std::move(per_channel));
        case ProtocolKind::ParallelSecretSharing:
            return AccessFormula::at_least(config.threshold, std::move(per_channel));
    }
    throw InvalidArgument("unknown protocol kind");
}

std::size_t max_leaves_from_env() {
    const char* env = std::getenv("HYBRID_KEYNET_MAX_LEAVES");
    if (!env || !*env) return kDefaultMaxLeaves;
    const std::string_view s(env);
    std::size_t value = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc{} || ptr != s.data() + s.size() || value == 0)
        throw InvalidArgument(fmt::format("HYBRID_KEYNET_MAX_LEAVES: invalid value \"{}\"", s));
    if (value > 64) throw InvalidArgument("HYBRID_KEYNET_MAX_LEAVES cannot exceed 64");
    return value;
}

namespace {

using Mask = std::uint64_t;
using Family = std::vector<Mask>;

// Drop every set that contains another member of the family.
Family absorb(Family f) {
    std::sort(f.begin(), f.end(), [](Mask a, Mask b) {
        const int pa = std::popcount(a), pb = std::popcount(b);
        return pa != pb ? pa < pb : a < b;
    });
    f.erase(std::unique(f.begin(), f.end()), f.end());
    Family kept;
    for (Mask m : f) {
        const bool covered = std::any_of(kept.begin(), kept.end(), [m](Mask k) { return (k & m) == k; });
        if (!covered) kept.push_back(m);
    }
    return kept;
}

Family product(const Family& a, const Family& b) {
    Family out;
    out.reserve(a.size() * b.size());
    for (Mask x : a)
        for (Mask y : b) out.push_back(x | y);
    return absorb(std::move(out));
}

Family expand(const AccessFormula& f, const std::map<std::string, int>& bit) {
    using Op = AccessFormula::Op;
    switch (f.op()) {
        case Op::Leaf:
            return {Mask{1} << bit.at(f.element())};
        case Op::Or: {
            Family out;
            for (const auto& c : f.children()) {
                auto sub = expand(c, bit);
                out.insert(out.end(), sub.begin(), sub.end());
            }
            return absorb(std::move(out));
        }
        case Op::And: {
            Family acc{0};
            for (const auto& c : f.children()) acc = product(acc, expand(c, bit));
            return acc;
        }
        case Op::Threshold: {
            // level[k]: minimal unions of exactly k chosen children so far.
            const unsigned t = f.threshold();
            std::vector<Family> level(t + 1);
            level[0] = {0};
            std::size_t seen = 0;
            for (const auto& c : f.children()) {
                const Family child = expand(c, bit);
                ++seen;
                for (std::size_t k = std::min<std::size_t>(t, seen); k >= 1; --k) {
                    if (level[k - 1].empty()) continue;
                    Family merged = level[k];
                    auto add = product(level[k - 1], child);
                    merged.insert(merged.end(), add.begin(), add.end());
                    level[k] = absorb(std::move(merged));
                }
            }
            return level[t];
        }
    }
    return {};
}

}  // namespace

AccessStructureSet minimal_access_structures(const AccessFormula& formula, std::size_t max_leaves) {
    if (auto problems = check_formula(formula); !problems.empty())
        throw InvalidArgument("malformed access formula: " + problems.front());
    const auto leaves = formula.leaves();
    const std::size_t bound = std::min<std::size_t>(max_leaves, 64);
    if (leaves.size() > bound)
        throw AnalysisError(fmt::format(
            "formula has {} distinct leaves, above the exact-enumeration bound of {} (set HYBRID_KEYNET_MAX_LEAVES "
            "to raise it)",
            leaves.size(), bound));

    std::map<std::string, int> bit;
    std::vector<std::string> ids(leaves.begin(), leaves.end());
    for (std::size_t i = 0; i < ids.size(); ++i) bit[ids[i]] = static_cast<int>(i);

    AccessStructureSet out;
    for (Mask m : expand(formula, bit)) {
        std::vector<std::string> set;
        for (std::size_t i = 0; i < ids.size(); ++i)
            if (m >> i & 1) set.push_back(ids[i]);
        for (const auto& e : set) ++out.element_criticality[e];
        out.minimal_sets.push_back(std::move(set));
    }
    std::sort(out.minimal_sets.begin(), out.minimal_sets.end(), [](const auto& a, const auto& b) {
        return a.size() != b.size() ? a.size() < b.size() : a < b;
    });
    return out;
}

std::vector<std::pair<std::string, std::size_t>> criticality_ranking(const AccessStructureSet& s) {
    std::vector<std::pair<std::string, std::size_t>> out(s.element_criticality.begin(), s.element_criticality.end());
    std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
    return out;
}

double compromise_probability(const NetworkTopology& topology, const std::string& element) {
    if (const Link* l = topology.find_link(element)) return l->compromise_prob;
    if (const Node* n = topology.find_node(element)) return 1.0 - n->trust_weight;
    throw InvalidArgument(fmt::format("element {} is not in the topology", element));
}

BreakAnalysis break_probability(const AccessStructureSet& s, const NetworkTopology& topology) {
    BreakAnalysis out;
    out.element_criticality = s.element_criticality;
    if (auto ranking = criticality_ranking(s); !ranking.empty()) out.most_critical = ranking.front().first;

    std::vector<std::string> ids;
    for (const auto& [id, _] : s.element_criticality) ids.push_back(id);
    if (ids.size() > kMaxBreakProbabilityElements)
        throw AnalysisError(fmt::format("{} elements exceed the exact break-probability bound of {}", ids.size(),
                                        kMaxBreakProbabilityElements));
    if (s.minimal_sets.empty()) return out;

    const std::size_t n = ids.size();
    const std::size_t states = std::size_t{1} << n;
    std::map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < n; ++i) index[ids[i]] = i;

    // covered[S]: S contains some minimal set (superset closure).
    std::vector<std::uint8_t> covered(states, 0);
    for (const auto& set : s.minimal_sets) {
        std::size_t m = 0;
        for (const auto& e : set) m |= std::size_t{1} << index.at(e);
        covered[m] = 1;
    }
    for (std::size_t b = 0; b < n; ++b)
        for (std::size_t m = 0; m < states; ++m)
            if (m >> b & 1) covered[m] |= covered[m ^ (std::size_t{1} << b)];

    // weight[S] = prod_{i in S} p_i * prod_{i not in S} (1 - p_i)
    std::vector<double> weight{1.0};
    weight.reserve(states);
    for (std::size_t i = 0; i < n; ++i) {
        const double p = compromise_probability(topology, ids[i]);
        const std::size_t half = weight.size();
        weight.resize(2 * half);
        for (std::size_t m = 0; m < half; ++m) {
            weight[m + half] = weight[m] * p;
            weight[m] *= 1.0 - p;
        }
    }
    double total = 0.0;
    for (std::size_t m = 0; m < states; ++m)
        if (covered[m]) total += weight[m];
    out.probability = total;
    return out;
}

}  // namespace keynet
