#include <algorithm>
#include <map>
#include <random>
#include <set>

#include <gtest/gtest.h>

#include "coac/explorer.hpp"
#include "coac/study.hpp"

using namespace coac;

namespace {

NetworkCosts synthetic(const std::vector<std::vector<CostPoint>>& costs, std::string name = "n") {
    NetworkCosts n;
    n.name = std::move(name);
    for (std::size_t l = 0; l < costs.size(); ++l) n.layer_ids.push_back(static_cast<int>(l + 1));
    n.costs = costs;
    return n;
}

NetworkCosts random_costs(std::mt19937& rng, std::size_t layers, std::size_t sus, int range = 50) {
    std::uniform_int_distribution<int> d(1, range);
    std::vector<std::vector<CostPoint>> c(layers, std::vector<CostPoint>(sus));
    for (auto& row : c)
        for (auto& p : row) p = {static_cast<double>(d(rng)), static_cast<double>(d(rng))};
    return synthetic(c);
}

/// Every assignment of a set member to each layer, Pareto-filtered with
/// the lexicographically smallest assignment kept among equal points.
std::vector<FrontPoint> oracle_front(const NetworkCosts& net, const std::vector<std::size_t>& set,
                                     const ReshuffleModel* reshuffle = nullptr) {
    const auto n = net.costs.size();
    std::vector<FrontPoint> all;
    std::vector<std::size_t> digit(n, 0);
    while (true) {
        std::vector<std::size_t> a(n);
        for (std::size_t l = 0; l < n; ++l) a[l] = set[digit[l]];
        all.push_back({assignment_cost(net, a, reshuffle), a});
        std::size_t l = n;
        while (l > 0 && ++digit[l - 1] == set.size()) digit[--l] = 0;
        if (l == 0) break;
    }
    std::vector<FrontPoint> out;
    for (const auto& p : all) {
        bool drop = false;
        for (const auto& q : all) {
            const bool weak = q.cost.latency <= p.cost.latency && q.cost.energy <= p.cost.energy;
            const bool equal = q.cost == p.cost;
            if ((weak && !equal) || (equal && q.assignment < p.assignment)) {
                drop = true;
                break;
            }
        }
        if (!drop) out.push_back(p);
    }
    std::sort(out.begin(), out.end(), [](const FrontPoint& a, const FrontPoint& b) {
        if (a.cost.latency != b.cost.latency) return a.cost.latency < b.cost.latency;
        return a.cost.energy < b.cost.energy;
    });
    return out;
}

std::vector<std::size_t> iota_set(std::size_t n) {
    std::vector<std::size_t> s(n);
    std::iota(s.begin(), s.end(), std::size_t{0});
    return s;
}

CostTable table_of(std::vector<NetworkCosts> nets, std::size_t n_sus) {
    CostTable t;
    const auto pool = enumerate_sus(64, SuConstraints::none());
    t.sus.assign(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(n_sus));
    t.networks = std::move(nets);
    return t;
}

Network hetero_network() {
    return {"hetero", {LayerShape::classical(1, 64, 64, 16, 16, 3, 3), LayerShape::depthwise(2, 64, 16, 16, 3, 3)}};
}

Network homo_network() {
    return {"homo",
            {LayerShape::classical(1, 64, 64, 16, 16, 3, 3), LayerShape::classical(2, 64, 64, 16, 16, 3, 3),
             LayerShape::classical(3, 64, 64, 16, 16, 3, 3)}};
}

ExploreOptions opts(int max_sus, unsigned jobs = 1) {
    ExploreOptions o;
    o.max_sus = max_sus;
    o.jobs = jobs;
    return o;
}

} // namespace

TEST(LayerPareto, Examples) {
    const std::vector<CostPoint> row{{10, 5}, {5, 10}, {9, 5}};
    const std::vector<std::size_t> one{0};
    EXPECT_EQ(layer_pareto(row, one), (std::vector<LayerParetoEntry>{{0, {10, 5}}}));
    const std::vector<std::size_t> incomparable{0, 1};
    EXPECT_EQ(layer_pareto(row, incomparable),
              (std::vector<LayerParetoEntry>{{1, {5, 10}}, {0, {10, 5}}}));
    const std::vector<std::size_t> dominated{0, 2};
    EXPECT_EQ(layer_pareto(row, dominated), (std::vector<LayerParetoEntry>{{2, {9, 5}}}));
}

TEST(LayerPareto, TieKeepsLowestSu) {
    const std::vector<CostPoint> row{{1, 1}, {2, 2}, {1, 1}};
    const std::vector<std::size_t> set{2, 1, 0};
    EXPECT_EQ(layer_pareto(row, set), (std::vector<LayerParetoEntry>{{0, {1, 1}}}));
}

TEST(NetworkPareto, SingleLayerEqualsLayerPareto) {
    std::mt19937 rng(41);
    const auto net = random_costs(rng, 1, 6);
    const auto set = iota_set(6);
    const auto front = network_pareto(net, set);
    const auto lp = layer_pareto(net.costs[0], set);
    ASSERT_EQ(front.size(), lp.size());
    for (std::size_t i = 0; i < lp.size(); ++i) {
        EXPECT_EQ(front[i].cost, lp[i].cost);
        EXPECT_EQ(front[i].assignment, std::vector<std::size_t>{lp[i].su});
    }
}

TEST(NetworkPareto, TwoLayersTwoSus) {
    const auto net = synthetic({{{10, 1}, {1, 10}}, {{4, 4}, {2, 6}}});
    const std::vector<std::size_t> set{0, 1};
    const auto front = network_pareto(net, set);
    EXPECT_EQ(front, oracle_front(net, set));
    EXPECT_EQ(front, (std::vector<FrontPoint>{{{3, 16}, {1, 1}}, {{5, 14}, {1, 0}}, {{12, 7}, {0, 1}}, {{14, 5}, {0, 0}}}));
}

TEST(NetworkPareto, FourLayersSixSusExhaustive) {
    std::mt19937 rng(42);
    for (int t = 0; t < 5; ++t) {
        const auto net = random_costs(rng, 4, 6);
        EXPECT_EQ(network_pareto(net, iota_set(6)), oracle_front(net, iota_set(6)));
    }
}

TEST(NetworkPareto, RandomInstancesMatchOracle) {
    std::mt19937 rng(43);
    for (int t = 0; t < 100; ++t) {
        const std::size_t layers = 1 + rng() % 5;
        const std::size_t n_sus = 1 + rng() % 6;
        const auto net = random_costs(rng, layers, 8, t % 2 ? 5 : 100); // small ranges force ties
        std::vector<std::size_t> set;
        const auto all = iota_set(8);
        std::sample(all.begin(), all.end(), std::back_inserter(set), n_sus, rng);
        EXPECT_EQ(network_pareto(net, set), oracle_front(net, set)) << "instance " << t;
    }
}

TEST(NetworkPareto, ReshuffleModeMatchesOracle) {
    std::mt19937 rng(44);
    const auto sus = study_sus();
    const std::vector<SpatialUnrolling> pool(sus.begin(), sus.end());
    for (int t = 0; t < 60; ++t) {
        const std::size_t layers = 1 + rng() % 5;
        const auto net = random_costs(rng, layers, pool.size(), t % 2 ? 6 : 60);
        ReshuffleModel m;
        m.sus = pool;
        m.pw_b_words = 4;
        m.energy_per_word = 1.0;
        for (std::size_t l = 0; l < layers; ++l) m.words_out.push_back(static_cast<double>(1 + rng() % 20));
        std::vector<std::size_t> set;
        const auto all = iota_set(pool.size());
        std::sample(all.begin(), all.end(), std::back_inserter(set), 1 + rng() % pool.size(), rng);
        EXPECT_EQ(network_pareto(net, set, 0.0, &m), oracle_front(net, set, &m)) << "instance " << t;
    }
}

TEST(NetworkPareto, ReshuffleChargesMisalignedTransitions) {
    const auto sus = study_sus();
    const std::vector<SpatialUnrolling> pool(sus.begin(), sus.end());
    ReshuffleModel m;
    m.sus = pool;
    m.pw_b_words = 4;
    m.energy_per_word = 2.0;
    m.words_out = {10, 10};
    // SU2 -> SU3 has cluster 1 (needs the buffer); SU2 -> SU4 has 4 (does not).
    EXPECT_TRUE(m.needs_buffer(1, 2));
    EXPECT_FALSE(m.needs_buffer(1, 3));
    const auto net = synthetic({{{1, 1}, {1, 1}, {1, 1}, {1, 1}}, {{1, 1}, {1, 1}, {1, 1}, {1, 1}}});
    const std::vector<std::size_t> a{1, 2};
    const std::vector<std::size_t> b{1, 3};
    EXPECT_EQ(assignment_cost(net, a, &m), (CostPoint{2, 22}));
    EXPECT_EQ(assignment_cost(net, b, &m), (CostPoint{2, 2}));
}

TEST(NetworkPareto, EmptySetRejected) {
    const auto net = synthetic({{{1, 1}}});
    EXPECT_THROW(network_pareto(net, std::vector<std::size_t>{}), PreconditionError);
}

TEST(Prune, SingleCandidateKept) {
    const auto t = table_of({synthetic({{{5, 5}}, {{3, 9}}})}, 1);
    EXPECT_EQ(prune_sus(t), (std::vector<std::size_t>{0}));
}

TEST(Prune, KeepsLatencyAndEnergyBest) {
    // SU0 latency-best everywhere, SU2 energy-best everywhere.
    const auto t = table_of({synthetic({{{1, 9}, {5, 5}, {9, 1}, {6, 6}},
                                        {{2, 8}, {4, 4}, {8, 2}, {5, 5}},
                                        {{1, 7}, {3, 3}, {7, 1}, {4, 4}}})},
                            4);
    EXPECT_EQ(prune_sus(t), (std::vector<std::size_t>{0, 2}));
}

TEST(Prune, TiesKeepAll) {
    const auto t = table_of({synthetic({{{1, 9}, {1, 5}, {9, 1}, {6, 1}}})}, 4);
    EXPECT_EQ(prune_sus(t), (std::vector<std::size_t>{0, 1, 2, 3}));
    const std::vector<std::size_t> sub{2, 3};
    EXPECT_EQ(prune_sus(t, sub), (std::vector<std::size_t>{2, 3}));
}

TEST(Normalize, SingleNetworkBestIsOne) {
    std::mt19937 rng(45);
    const auto t = normalize_networks(table_of({random_costs(rng, 4, 5)}, 5));
    EXPECT_DOUBLE_EQ(best_single_su_latency(t).at(0), 1.0);
}

TEST(Normalize, IdenticalNetworksStayIdentical) {
    std::mt19937 rng(46);
    auto a = random_costs(rng, 3, 4);
    auto b = a;
    b.name = "m";
    const auto t = normalize_networks(table_of({a, b}, 4));
    EXPECT_EQ(t.networks[0].costs, t.networks[1].costs);
}

TEST(Normalize, ScaleInvariant) {
    std::mt19937 rng(47);
    const auto a = random_costs(rng, 3, 4);
    auto b = a;
    for (auto& row : b.costs)
        for (auto& c : row) {
            c.latency *= 10;
            c.energy *= 10;
        }
    const auto ta = normalize_networks(table_of({a}, 4));
    const auto tb = normalize_networks(table_of({b}, 4));
    for (std::size_t l = 0; l < 3; ++l)
        for (std::size_t s = 0; s < 4; ++s) {
            EXPECT_DOUBLE_EQ(ta.networks[0].costs[l][s].latency, tb.networks[0].costs[l][s].latency);
            EXPECT_DOUBLE_EQ(ta.networks[0].costs[l][s].energy, tb.networks[0].costs[l][s].energy);
        }
}

TEST(Normalize, ZeroLatencyRejected) {
    const auto t = table_of({synthetic({{{0, 1}}})}, 1);
    EXPECT_THROW(normalize_networks(t), PreconditionError);
}

TEST(Combinations, UnrankEnumeratesInLexicographicOrder) {
    for (std::size_t n : {1u, 5u, 9u})
        for (std::size_t k = 1; k <= std::min<std::size_t>(n, 4); ++k) {
            const auto total = detail::binomial(n, k);
            auto c = detail::unrank_combination(0, n, k);
            for (std::uint64_t r = 0; r < total; ++r) {
                EXPECT_EQ(detail::unrank_combination(r, n, k), c);
                const bool more = detail::next_combination(c, n);
                EXPECT_EQ(more, r + 1 < total);
            }
        }
    EXPECT_EQ(detail::binomial(1617, 2), 1306536u);
    EXPECT_EQ(detail::binomial(3, 5), 0u);
}

TEST(Explore, SingleSuFrontHoldsBestLatencyAndEnergy) {
    const auto arch = study_arch();
    const auto res = explore(arch, {hetero_network()}, opts(1));
    double best_l = std::numeric_limits<double>::infinity();
    double best_e = best_l;
    for (std::size_t s = 0; s < res.table.sus.size(); ++s) {
        double l = 0, e = 0;
        for (const auto& row : res.table.networks[0].costs) {
            l += row[s].latency;
            e += row[s].energy;
        }
        best_l = std::min(best_l, l);
        best_e = std::min(best_e, e);
    }
    bool has_l = false, has_e = false;
    for (const auto* p : all_points(res.solutions)) {
        has_l |= p->cost.latency == best_l;
        has_e |= p->cost.energy == best_e;
    }
    EXPECT_TRUE(has_l);
    EXPECT_TRUE(has_e);
    for (const auto& sol : res.solutions) EXPECT_EQ(sol.su_set.size(), 1u);
}

TEST(Explore, HeterogeneousWorkloadGainsFromTwoSus) {
    const auto arch = study_arch();
    const auto one = explore(arch, {hetero_network()}, opts(1));
    const auto two = explore(arch, {hetero_network()}, opts(2));
    EXPECT_LT(min_edp(two.solutions), min_edp(one.solutions));
}

TEST(Explore, HomogeneousWorkloadGainsNothing) {
    const auto arch = study_arch();
    const auto one = explore(arch, {homo_network()}, opts(1));
    const auto two = explore(arch, {homo_network()}, opts(2));
    EXPECT_EQ(latency_energy_front(two.solutions), latency_energy_front(one.solutions));
    EXPECT_EQ(min_edp(two.solutions), min_edp(one.solutions));
}

TEST(Explore, FrontPointsAreReconstructible) {
    const auto arch = study_arch();
    const auto res = explore(arch, {hetero_network(), homo_network()}, opts(2));
    EXPECT_TRUE(res.normalized);
    for (const auto& sol : res.solutions) {
        const std::set<std::size_t> members(sol.su_set.begin(), sol.su_set.end());
        for (const auto& p : sol.front) {
            std::size_t off = 0;
            CostPoint total;
            for (const auto& net : res.table.networks) {
                const auto n = net.costs.size();
                const std::vector<std::size_t> part(p.assignment.begin() + static_cast<std::ptrdiff_t>(off),
                                                    p.assignment.begin() + static_cast<std::ptrdiff_t>(off + n));
                for (auto s : part) EXPECT_TRUE(members.count(s));
                const auto c = assignment_cost(net, part);
                total.latency += c.latency;
                total.energy += c.energy;
                off += n;
            }
            EXPECT_EQ(off, p.assignment.size());
            EXPECT_EQ(total, p.cost);
        }
    }
}

TEST(Explore, FinalFrontIsNonDominated) {
    const auto res = explore(study_arch(), {hetero_network()}, opts(3));
    const auto pts = all_points(res.solutions);
    for (const auto* a : pts)
        for (const auto* b : pts) {
            const bool le = a->cost.latency <= b->cost.latency && a->cost.energy <= b->cost.energy && a->area <= b->area;
            const bool lt = a->cost.latency < b->cost.latency || a->cost.energy < b->cost.energy || a->area < b->area;
            EXPECT_FALSE(le && lt);
        }
    EXPECT_EQ(res.by_size.size(), 3u);
}

TEST(Explore, NestingOverMaxSus) {
    const auto arch = study_arch();
    double prev = std::numeric_limits<double>::infinity();
    for (int k = 1; k <= 3; ++k) {
        const auto e = min_edp(explore(arch, {hetero_network()}, opts(k)).solutions);
        EXPECT_LE(e, prev);
        prev = e;
    }
}

TEST(Explore, DeterministicAcrossJobCounts) {
    const auto arch = study_arch();
    auto o = opts(3, 1);
    o.prune = false;
    const auto a = explore(arch, {hetero_network()}, o);
    o.jobs = 4;
    const auto b = explore(arch, {hetero_network()}, o);
    ASSERT_EQ(a.solutions.size(), b.solutions.size());
    for (std::size_t i = 0; i < a.solutions.size(); ++i) {
        EXPECT_EQ(a.solutions[i].su_set, b.solutions[i].su_set);
        ASSERT_EQ(a.solutions[i].front.size(), b.solutions[i].front.size());
        for (std::size_t j = 0; j < a.solutions[i].front.size(); ++j) {
            EXPECT_EQ(a.solutions[i].front[j].cost, b.solutions[i].front[j].cost);
            EXPECT_EQ(a.solutions[i].front[j].assignment, b.solutions[i].front[j].assignment);
        }
    }
}

TEST(Explore, PrunedAndUnprunedFrontsAgreeOnToy) {
    const auto arch = study_arch();
    auto o = opts(2);
    const auto pruned = explore(arch, {hetero_network()}, o);
    o.prune = false;
    const auto full = explore(arch, {hetero_network()}, o);
    EXPECT_LT(pruned.candidates.size(), full.candidates.size());
    EXPECT_EQ(latency_energy_front(pruned.solutions), latency_energy_front(full.solutions));
}

TEST(Explore, ExactSizeOnly) {
    auto o = opts(2);
    o.include_smaller_sets = false;
    const auto res = explore(study_arch(), {hetero_network()}, o);
    for (const auto& sol : res.solutions) EXPECT_EQ(sol.su_set.size(), 2u);
    EXPECT_EQ(res.by_size.size(), 1u);
}

TEST(Explore, SubsetCapTruncates) {
    auto o = opts(2);
    o.prune = false;
    o.subset_cap = 10;
    const auto res = explore(study_arch(), {hetero_network()}, o);
    EXPECT_TRUE(res.truncated);
    EXPECT_EQ(res.subsets_evaluated, 10u);
    EXPECT_GT(res.subsets_total, 10u);
}

TEST(Explore, ImportedTableOverridesModel) {
    const auto arch = study_arch();
    const auto net = hetero_network();
    const auto sus = study_sus();
    CostTable t;
    t.provenance = Provenance::imported;
    t.sus.assign(sus.begin(), sus.end());
    std::sort(t.sus.begin(), t.sus.end());
    // Flat costs except one SU that is best everywhere.
    const auto star = *t.su_index(sus[2]);
    NetworkCosts nc;
    nc.name = net.name;
    for (const auto& l : net.layers) {
        nc.layer_ids.push_back(l.id);
        std::vector<CostPoint> row(t.sus.size(), CostPoint{100, 100});
        row[star] = {1, 1};
        nc.costs.push_back(row);
    }
    t.networks.push_back(nc);
    const auto res = explore(arch, {net}, opts(2), &t);
    EXPECT_EQ(res.table.provenance, Provenance::imported);
    ASSERT_EQ(res.solutions.size(), 1u);
    EXPECT_EQ(res.solutions[0].su_set, std::vector<std::size_t>{star});
    EXPECT_EQ(res.solutions[0].front.at(0).cost, (CostPoint{2, 2}));
}

TEST(Explore, ImportedSuMustFitArray) {
    const auto net = hetero_network();
    CostTable t;
    t.sus = {parse_su("C=4,K=4")};
    NetworkCosts nc{net.name, {1, 2}, {{{1, 1}}, {{1, 1}}}};
    t.networks.push_back(nc);
    EXPECT_THROW(explore(study_arch(), {net}, opts(1), &t), ValidationError);
}

TEST(Explore, OptionValidation) {
    EXPECT_THROW(explore(study_arch(), {hetero_network()}, opts(0)), ValidationError);
    auto o = opts(1);
    o.epsilon = -1;
    EXPECT_THROW(explore(study_arch(), {hetero_network()}, o), ValidationError);
    EXPECT_THROW(explore(study_arch(), {}, opts(1)), ValidationError);
}
