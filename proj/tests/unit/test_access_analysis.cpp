#include <gtest/gtest.h>

#include <cstdlib>
#include <random>

#include "fixtures.hpp"
#include "keynet/access_analysis.hpp"
#include "keynet/error.hpp"
#include "oracles.hpp"

using namespace keynet;
using namespace keynet::testing;

namespace {

using Sets = std::vector<std::vector<std::string>>;
using F = AccessFormula;

F leaf(const char* s) { return F::leaf(s); }

class ScopedEnv {
public:
    ScopedEnv(const char* name, const char* value) : name_(name) {
        if (const char* old = std::getenv(name)) old_ = old;
        ::setenv(name, value, 1);
    }
    ~ScopedEnv() {
        if (old_)
            ::setenv(name_, old_->c_str(), 1);
        else
            ::unsetenv(name_);
    }

private:
    const char* name_;
    std::optional<std::string> old_;
};

NetworkTopology two_links(double p1, double p2) {
    return parse_topology(fmt::format(R"({{"nodes":[{{"id":"A","kind":"EndUser"}},{{"id":"B","kind":"EndUser"}}],
      "links":[{{"id":"q1","endpoints":["A","B"],"kind":"Qkd","length_km":10,"compromise_prob":{}}},
               {{"id":"k1","endpoints":["A","B"],"kind":"Kem","algorithm_label":"lattice-kem","compromise_prob":{}}}],
      "alice":"A","bob":"B"}})",
                                      p1, p2));
}

}  // namespace

TEST(AccessFormula, DerivedForSeriesChain) {
    const auto t = load_topology("series_chain");
    const ProtocolConfig cfg{ProtocolKind::Series, {{"c", {"q1", "k12", "q2"}}}, 0, FieldTag::Gf256};
    const F f = derive_access_formula(t, cfg);
    EXPECT_EQ(f.to_string(), "OR(q1,k12,q2,D1,D2)");
    EXPECT_TRUE(check_formula(f, &t).empty());
}

TEST(AccessFormula, DerivedForParallelXorAndSharing) {
    const auto t = load_topology("parallel_xor");
    const ProtocolConfig x{ProtocolKind::ParallelXor, {{"c1", {"q1"}}, {"c2", {"k1"}}}, 0, FieldTag::Gf256};
    EXPECT_EQ(derive_access_formula(t, x).to_string(), "AND(q1,k1)");
    const auto s = load_topology("secret_sharing");
    const ProtocolConfig ss{ProtocolKind::ParallelSecretSharing, {{"c1", {"q1", "q2"}}, {"c2", {"q3"}}, {"c3", {"k1"}}},
                            2, FieldTag::Gf256};
    EXPECT_EQ(derive_access_formula(s, ss).to_string(), "THRESHOLD(2,OR(q1,q2,D1),q3,k1)");
}

TEST(AccessFormula, Evaluate) {
    const F f = F::at_least(2, {F::any_of({leaf("q1"), leaf("D1")}), leaf("q2"), leaf("q3")});
    EXPECT_EQ(f.to_string(), "THRESHOLD(2,OR(q1,D1),q2,q3)");
    EXPECT_FALSE(evaluate(f, {}));
    EXPECT_FALSE(evaluate(f, {"q1", "D1"}));
    EXPECT_TRUE(evaluate(f, {"D1", "q3"}));
    EXPECT_TRUE(evaluate(f, {"q2", "q3"}));
    EXPECT_TRUE(evaluate(F::all_of({leaf("a"), leaf("b")}), {"a", "b", "zzz"}));
}

TEST(AccessFormula, SingleChildCollapses) {
    EXPECT_EQ(F::any_of({leaf("x")}), leaf("x"));
    EXPECT_EQ(F::all_of({leaf("x")}), leaf("x"));
}

TEST(AccessFormula, StructuralChecks) {
    EXPECT_FALSE(check_formula(F::at_least(3, {leaf("a"), leaf("b")})).empty());
    EXPECT_FALSE(check_formula(F::at_least(0, {leaf("a"), leaf("b")})).empty());
    EXPECT_FALSE(check_formula(F::any_of({})).empty());
    const auto t = load_topology("minimal");
    EXPECT_FALSE(check_formula(leaf("nope"), &t).empty());
    EXPECT_THROW(minimal_access_structures(F::at_least(3, {leaf("a"), leaf("b")})), InvalidArgument);
}

TEST(MinimalSets, ThresholdExample) {
    const F f = F::at_least(2, {F::any_of({leaf("q1"), leaf("D1")}), leaf("q2"), leaf("q3")});
    const auto s = minimal_access_structures(f);
    EXPECT_EQ(s.minimal_sets, (Sets{{"D1", "q2"}, {"D1", "q3"}, {"q1", "q2"}, {"q1", "q3"}, {"q2", "q3"}}));
    EXPECT_EQ(s.element_criticality.at("q2"), 3u);
    EXPECT_EQ(s.element_criticality.at("D1"), 2u);
}

TEST(MinimalSets, SeriesIsAllSingletons) {
    const F f = F::any_of({leaf("q1"), leaf("k12"), leaf("q2"), leaf("D1"), leaf("D2")});
    EXPECT_EQ(minimal_access_structures(f).minimal_sets, (Sets{{"D1"}, {"D2"}, {"k12"}, {"q1"}, {"q2"}}));
}

TEST(MinimalSets, AbsorptionRemovesSupersets) {
    const F f = F::any_of({leaf("a"), F::all_of({leaf("a"), leaf("b")})});
    EXPECT_EQ(minimal_access_structures(f).minimal_sets, (Sets{{"a"}}));
}

TEST(MinimalSets, MatchBruteForceOnRandomFormulas) {
    std::mt19937_64 rng(4242);
    for (int i = 0; i < 300; ++i) {
        const F f = random_formula(rng, 8);
        const auto got = minimal_access_structures(f);
        ASSERT_EQ(got.minimal_sets, brute_force_minimal_sets(f)) << f.to_string();
        // Antichain, soundness and minimality.
        for (std::size_t a = 0; a < got.minimal_sets.size(); ++a) {
            const auto& sa = got.minimal_sets[a];
            const std::set<std::string> set(sa.begin(), sa.end());
            ASSERT_TRUE(evaluate(f, set));
            for (const auto& e : sa) {
                auto smaller = set;
                smaller.erase(e);
                ASSERT_FALSE(evaluate(f, smaller));
            }
            for (std::size_t b = 0; b < got.minimal_sets.size(); ++b) {
                if (a == b) continue;
                const auto& sb = got.minimal_sets[b];
                ASSERT_FALSE(std::includes(sb.begin(), sb.end(), sa.begin(), sa.end()));
            }
        }
    }
}

TEST(MinimalSets, LeafBound) {
    std::vector<F> kids;
    for (int i = 0; i < 6; ++i) kids.push_back(F::leaf(fmt::format("e{}", i)));
    const F f = F::all_of(kids);
    EXPECT_THROW(minimal_access_structures(f, 5), AnalysisError);
    EXPECT_NO_THROW(minimal_access_structures(f, 6));
}

TEST(MinimalSets, LeafBoundFromEnvironment) {
    {
        ScopedEnv env("HYBRID_KEYNET_MAX_LEAVES", "7");
        EXPECT_EQ(max_leaves_from_env(), 7u);
    }
    {
        ScopedEnv env("HYBRID_KEYNET_MAX_LEAVES", "seven");
        EXPECT_THROW(max_leaves_from_env(), InvalidArgument);
    }
    {
        ScopedEnv env("HYBRID_KEYNET_MAX_LEAVES", "65");
        EXPECT_THROW(max_leaves_from_env(), InvalidArgument);
    }
    ::unsetenv("HYBRID_KEYNET_MAX_LEAVES");
    EXPECT_EQ(max_leaves_from_env(), kDefaultMaxLeaves);
}

TEST(Criticality, RankingOrder) {
    AccessStructureSet s;
    s.minimal_sets = {{"a", "b"}, {"b", "c"}, {"c", "d"}};
    s.element_criticality = {{"a", 1}, {"b", 2}, {"c", 2}, {"d", 1}};
    const auto r = criticality_ranking(s);
    ASSERT_EQ(r.size(), 4u);
    EXPECT_EQ(r[0], (std::pair<std::string, std::size_t>{"b", 2}));
    EXPECT_EQ(r[1].first, "c");
    EXPECT_EQ(r[2].first, "a");
    EXPECT_EQ(r[3].first, "d");
}

TEST(BreakProbability, Examples) {
    const auto t = two_links(0.1, 0.1);
    EXPECT_NEAR(break_probability(minimal_access_structures(leaf("q1")), two_links(0.01, 0)).probability, 0.01, 1e-12);
    EXPECT_NEAR(break_probability(minimal_access_structures(F::any_of({leaf("q1"), leaf("k1")})), t).probability, 0.19,
                1e-12);
    EXPECT_NEAR(break_probability(minimal_access_structures(F::all_of({leaf("q1"), leaf("k1")})), two_links(0.5, 1.0))
                    .probability,
                0.5, 1e-12);
    const auto b = break_probability(minimal_access_structures(F::all_of({leaf("q1"), leaf("k1")})), t);
    EXPECT_NEAR(b.probability, 0.01, 1e-12);
    EXPECT_EQ(b.most_critical, "k1");
}

TEST(BreakProbability, NodesUseTrustWeight) {
    const auto t = load_topology("series_chain");
    EXPECT_DOUBLE_EQ(compromise_probability(t, "D1"), 1.0 - 0.9);
    EXPECT_DOUBLE_EQ(compromise_probability(t, "k12"), 0.05);
    EXPECT_THROW(compromise_probability(t, "zz"), InvalidArgument);
    const ProtocolConfig cfg{ProtocolKind::Series, {{"c", {"q1", "k12", "q2"}}}, 0, FieldTag::Gf256};
    const auto b = break_probability(minimal_access_structures(derive_access_formula(t, cfg)), t);
    EXPECT_NEAR(b.probability, 1.0 - 0.99 * 0.95 * 0.99 * 0.9 * 0.8, 1e-12);
}

TEST(BreakProbability, AgreesWithMonteCarlo) {
    const auto t = load_topology("shared_relay");
    const ProtocolConfig cfg{ProtocolKind::ParallelXor, {{"c1", {"q1", "k1"}}, {"c2", {"q2", "k2"}}}, 0, FieldTag::Gf256};
    const F f = derive_access_formula(t, cfg);
    const auto exact = break_probability(minimal_access_structures(f), t).probability;
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const auto leaves = f.leaves();
    std::vector<std::pair<std::string, double>> p;
    for (const auto& e : leaves) p.emplace_back(e, compromise_probability(t, e));
    constexpr int kSamples = 1000000;
    int hits = 0;
    for (int i = 0; i < kSamples; ++i) {
        std::set<std::string> s;
        for (const auto& [e, pe] : p)
            if (u(rng) < pe) s.insert(e);
        hits += evaluate(f, s);
    }
    const double est = static_cast<double>(hits) / kSamples;
    const double se = std::sqrt(exact * (1 - exact) / kSamples);
    EXPECT_NEAR(est, exact, 3 * se);
}

TEST(BreakProbability, NoMinimalSetsMeansZero) {
    const auto b = break_probability(AccessStructureSet{}, two_links(0.5, 0.5));
    EXPECT_EQ(b.probability, 0.0);
    EXPECT_TRUE(b.most_critical.empty());
}
