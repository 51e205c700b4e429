#include <algorithm>
#include <random>

#include <gtest/gtest.h>

#include "coac/mapping_cost.hpp"

using namespace coac;

namespace {

const auto kMobilenetDw = LayerShape::depthwise(2, 32, 112, 112, 3, 3);
const auto kResnetConv = LayerShape::classical(29, 384, 256, 13, 13, 3, 3);

SpatialUnrolling any_su(const char* text) { return parse_su(text, FactorRule::any_positive); }

ArchConfig ports(std::int64_t w, std::int64_t i, std::int64_t o, std::int64_t nb_pes = 256) {
    ArchConfig a;
    a.nb_pes = nb_pes;
    a.pw_w_bits = w;
    a.pw_i_bits = i;
    a.pw_o_bits = o;
    return a;
}

/// Cycle-level model: every cycle each port delivers its width in bits; a
/// spatial pass issues (at most one per cycle) once every streaming port
/// has buffered the bits that pass needs.
std::int64_t simulate_cycles(std::int64_t passes, const DataNeeds& need, const ArchConfig& arch, Loop loop) {
    const auto use = ports_for(loop);
    std::int64_t bw = 0, bi = 0, bo = 0, done = 0, cycle = 0;
    while (done < passes) {
        ++cycle;
        bw += arch.pw_w_bits;
        bi += arch.pw_i_bits;
        bo += arch.pw_o_bits;
        const bool ready = (!use.weights || bw >= need.w_bits) && (!use.inputs || bi >= need.i_bits) &&
                           (!use.outputs || bo >= need.o_bits);
        if (!ready) continue;
        if (use.weights) bw -= need.w_bits;
        if (use.inputs) bi -= need.i_bits;
        if (use.outputs) bo -= need.o_bits;
        ++done;
    }
    return cycle;
}

/// Fewest cycles over the innermost loops that still iterate in time.
std::int64_t oracle_latency(const LayerShape& layer, const SpatialUnrolling& su, const ArchConfig& arch) {
    const auto passes = spatial_iterations(layer, su);
    const auto need = data_needs(su, arch.p_bits);
    std::int64_t best = -1;
    for (auto loop : kInnermostOrder) {
        if ((layer[dim_of(loop)] + su[dim_of(loop)] - 1) / su[dim_of(loop)] <= 1) continue;
        const auto c = simulate_cycles(passes, need, arch, loop);
        if (best < 0 || c < best) best = c;
    }
    if (best < 0) best = simulate_cycles(passes, need, arch, Loop::G);
    return best;
}

} // namespace

TEST(SpatialUtilization, DepthwiseLayerExamples) {
    EXPECT_DOUBLE_EQ(spatial_utilization(kMobilenetDw, any_su("FX=3,FY=3,G=16")), 1.0);
    EXPECT_NEAR(spatial_utilization(kMobilenetDw, any_su("C=12,K=12")), 1.0 / 144.0, 1e-15);
}

TEST(SpatialUtilization, ClassicalLayerUnderTpuLikeSu) {
    EXPECT_NEAR(spatial_utilization(kResnetConv, any_su("C=12,K=12")), 256.0 / 264.0, 1e-15);
}

TEST(SpatialUtilization, ExactDivisionGivesOne) {
    const auto l = LayerShape::classical(1, 64, 32, 16, 8, 3, 3);
    EXPECT_DOUBLE_EQ(spatial_utilization(l, parse_su("C=4,K=8,OX=4,OY=2")), 1.0);
}

TEST(SpatialUtilization, RangeAndDivisibility) {
    std::mt19937 rng(11);
    std::uniform_int_distribution<int> dim(1, 40);
    const auto sus = enumerate_sus(64, SuConstraints::none());
    std::uniform_int_distribution<std::size_t> pick(0, sus.size() - 1);
    for (int t = 0; t < 2000; ++t) {
        const auto l = LayerShape::classical(1, dim(rng), dim(rng), dim(rng), dim(rng), dim(rng) % 7 + 1, dim(rng) % 7 + 1);
        const auto& su = sus[pick(rng)];
        const double s = spatial_utilization(l, su);
        EXPECT_GT(s, 0.0);
        EXPECT_LE(s, 1.0);
        bool divisible = true;
        for (auto d : kAllDims) divisible = divisible && l[d] % su[d] == 0;
        EXPECT_EQ(s == 1.0, divisible);
    }
}

TEST(SpatialUtilization, SymmetricUnderXYSwap) {
    std::mt19937 rng(12);
    std::uniform_int_distribution<int> dim(1, 30);
    const auto sus = enumerate_sus(32, SuConstraints::none());
    for (int t = 0; t < 500; ++t) {
        const auto l = LayerShape::classical(1, dim(rng), dim(rng), dim(rng), dim(rng), dim(rng) % 5 + 1, dim(rng) % 5 + 1);
        const auto& su = sus[static_cast<std::size_t>(t) % sus.size()];
        auto l2 = l;
        std::swap(l2[Dim::OX], l2[Dim::OY]);
        std::swap(l2[Dim::FX], l2[Dim::FY]);
        auto su2 = su;
        std::swap(su2[Dim::OX], su2[Dim::OY]);
        std::swap(su2[Dim::FX], su2[Dim::FY]);
        EXPECT_NEAR(spatial_utilization(l, su), spatial_utilization(l2, su2), 1e-15);
    }
}

TEST(DataNeeds, Examples) {
    EXPECT_EQ(data_needs(SpatialUnrolling{}, 8), (DataNeeds{8, 8, 16}));
    EXPECT_EQ(data_needs(parse_su("C=2,K=2,OX=2"), 8), (DataNeeds{32, 32, 64}));
    EXPECT_EQ(data_needs(parse_su("K=16,OX=16"), 8), (DataNeeds{128, 128, 4096}));
    EXPECT_EQ(data_needs(parse_su("G=8"), 8), (DataNeeds{64, 64, 128}));
}

TEST(TemporalUtilization, Examples) {
    const auto su = parse_su("K=16,OX=16");
    const auto evo = evolver256_arch();
    EXPECT_DOUBLE_EQ(temporal_utilization(su, evo, Loop::OX), 0.25);
    EXPECT_DOUBLE_EQ(temporal_utilization(su, evo, Loop::K), 0.25);
    EXPECT_DOUBLE_EQ(temporal_utilization(su, evo, Loop::C), 1.0);
    EXPECT_DOUBLE_EQ(temporal_utilization(su, evo, Loop::G), 0.25);
    const auto wide = ports(1 << 20, 1 << 20, 1 << 20);
    for (auto l : kInnermostOrder) EXPECT_DOUBLE_EQ(temporal_utilization(su, wide, l), 1.0);
}

TEST(TemporalUtilization, UnsupportedLoopName) {
    EXPECT_EQ(parse_loop("OY"), Loop::OY);
    EXPECT_THROW(parse_loop("FX"), PreconditionError);
}

TEST(TemporalUtilization, MonotoneInPortsAndFactors) {
    std::mt19937 rng(13);
    std::uniform_int_distribution<int> e(3, 12);
    const auto sus = enumerate_sus(64, SuConstraints::none());
    for (int t = 0; t < 500; ++t) {
        auto a = ports(1 << e(rng), 1 << e(rng), 1 << e(rng), 64);
        const auto& su = sus[static_cast<std::size_t>(t * 7) % sus.size()];
        for (auto loop : kInnermostOrder) {
            const double base = temporal_utilization(su, a, loop);
            EXPECT_GT(base, 0.0);
            EXPECT_LE(base, 1.0);
            for (auto* field : {&a.pw_w_bits, &a.pw_i_bits, &a.pw_o_bits}) {
                *field *= 2;
                EXPECT_GE(temporal_utilization(su, a, loop), base);
                *field /= 2;
            }
            for (auto d : kAllDims) {
                auto bigger = su;
                bigger[d] *= 2;
                EXPECT_LE(temporal_utilization(bigger, a, loop), base);
            }
        }
    }
}

TEST(BestTemporal, LargeClassicalLayerPicksC) {
    const auto l = LayerShape::classical(1, 512, 512, 64, 64, 3, 3);
    const auto choice = best_temporal(l, parse_su("K=16,OX=16"), evolver256_arch());
    EXPECT_EQ(choice.innermost, Loop::C);
    EXPECT_DOUBLE_EQ(choice.t_ut, 1.0);
    EXPECT_FALSE(choice.single_pass);
}

TEST(BestTemporal, TieBreakOrder) {
    // Every candidate reaches 1.0; C wins the tie.
    const auto l = LayerShape::classical(1, 64, 64, 64, 64, 1, 1);
    const auto wide = ports(1 << 20, 1 << 20, 1 << 20);
    EXPECT_EQ(best_temporal(l, parse_su("C=4,K=4,OX=4,OY=4"), wide).innermost, Loop::C);
    // Without remaining C iterations, K is next.
    const auto l2 = LayerShape::classical(1, 64, 4, 64, 64, 1, 1);
    EXPECT_EQ(best_temporal(l2, parse_su("C=4,K=4,OX=4,OY=4"), wide).innermost, Loop::K);
}

TEST(BestTemporal, DepthwiseGroupUnrolling) {
    const auto l = LayerShape::depthwise(1, 64, 1, 1, 3, 3);
    const auto choice = best_temporal(l, parse_su("G=8"), ports(4096, 4096, 4096, 8));
    EXPECT_EQ(choice.innermost, Loop::G);
    EXPECT_DOUBLE_EQ(choice.t_ut, 1.0);
}

TEST(BestTemporal, SinglePassUsesAllPorts) {
    const auto l = LayerShape::classical(1, 16, 1, 16, 1, 1, 1);
    const auto su = parse_su("K=16,OX=16");
    const auto evo = evolver256_arch();
    const auto choice = best_temporal(l, su, evo);
    EXPECT_TRUE(choice.single_pass);
    EXPECT_EQ(choice.innermost, Loop::G);
    EXPECT_DOUBLE_EQ(choice.t_ut, temporal_utilization(su, evo, Loop::G));
}

TEST(LayerCost, PerfectFitRunsAtFullRate) {
    const auto l = LayerShape::classical(1, 32, 32, 16, 16, 1, 1);
    const auto su = parse_su("C=4,K=4,OX=4,OY=4");
    const auto wide = ports(1 << 20, 1 << 20, 1 << 20);
    EXPECT_DOUBLE_EQ(layer_cost(l, su, wide).latency, static_cast<double>(layer_macs(l) / 256));
}

TEST(LayerCost, NarrowerOutputPortDoublesLatency) {
    // Only K iterates in time, so K is innermost and the output port binds.
    const auto l = LayerShape::classical(1, 64, 1, 16, 1, 1, 1);
    const auto su = parse_su("K=16,OX=16");
    const auto a = ports(4096, 1024, 1024);
    auto narrow = a;
    narrow.pw_o_bits = 512;
    ASSERT_EQ(best_temporal(l, su, a).innermost, Loop::K);
    EXPECT_DOUBLE_EQ(best_temporal(l, su, narrow).t_ut, best_temporal(l, su, a).t_ut / 2);
    EXPECT_DOUBLE_EQ(layer_cost(l, su, a).latency, 16.0);
    EXPECT_DOUBLE_EQ(layer_cost(l, su, narrow).latency, 32.0);
}

TEST(LayerCost, LatencyMatchesCycleSimulation) {
    std::mt19937 rng(14);
    std::uniform_int_distribution<int> small(1, 8);
    std::uniform_int_distribution<int> port_exp(3, 9);
    int checked = 0;
    for (int nb : {8, 16}) {
        const auto sus = enumerate_sus(nb, SuConstraints::none());
        while (checked < (nb == 8 ? 400 : 800)) {
            LayerShape l = rng() % 3 == 0 ? LayerShape::depthwise(1, small(rng), small(rng), small(rng), small(rng) % 3 + 1, small(rng) % 3 + 1)
                                          : LayerShape::classical(1, small(rng), small(rng), small(rng), small(rng), small(rng) % 3 + 1, small(rng) % 3 + 1);
            if (layer_macs(l) > 4096) continue;
            ArchConfig a = ports(1LL << port_exp(rng), 1LL << port_exp(rng), 1LL << port_exp(rng), nb);
            const auto& su = sus[rng() % sus.size()];
            ASSERT_EQ(static_cast<std::int64_t>(layer_cost(l, su, a).latency), oracle_latency(l, su, a))
                << to_string(su);
            ++checked;
        }
    }
}

TEST(LayerCost, LatencyLowerBoundAndPositiveEnergy) {
    std::mt19937 rng(15);
    std::uniform_int_distribution<int> dim(1, 64);
    const auto sus = enumerate_sus(64, SuConstraints::none());
    const auto a = ports(512, 256, 256, 64);
    for (int t = 0; t < 3000; ++t) {
        const auto l = LayerShape::classical(1, dim(rng), dim(rng), dim(rng), dim(rng), dim(rng) % 5 + 1, dim(rng) % 5 + 1);
        const auto& su = sus[rng() % sus.size()];
        const auto c = layer_cost(l, su, a);
        EXPECT_GE(c.latency * 64, static_cast<double>(layer_macs(l)));
        EXPECT_GT(c.energy, 0.0);
        const auto ev = evaluate_layer(l, su, a);
        // Latency is iters / T_ut rounded up once.
        const double ideal = static_cast<double>(ev.spatial_iterations) / ev.temporal.t_ut;
        EXPECT_GE(ev.cost.latency, ideal * (1 - 1e-12));
        EXPECT_LT(ev.cost.latency, ideal + 1);
    }
}

TEST(LayerCost, StationaryOperandIsFetchedOnce) {
    // Innermost C keeps outputs stationary: each output word is written once.
    const auto l = LayerShape::classical(1, 4, 64, 4, 1, 1, 1);
    const auto su = parse_su("C=2,K=2,OX=2");
    ArchConfig a = ports(1024, 1024, 1024, 8);
    a.energy = {1.0, 0.0, 0.0, 1.0, 0.0};
    ASSERT_EQ(best_temporal(l, su, a).innermost, Loop::C);
    EXPECT_DOUBLE_EQ(layer_cost(l, su, a).energy, static_cast<double>(layer_macs(l)) + 16.0);
}

TEST(CostTable, BuildIsDenseAndSorted) {
    Network net{"n", {LayerShape::classical(1, 8, 8, 4, 4, 3, 3), LayerShape::depthwise(2, 8, 4, 4, 3, 3)}};
    const auto sus = enumerate_sus(8);
    auto shuffled = sus;
    std::reverse(shuffled.begin(), shuffled.end());
    const auto a = ports(32, 32, 32, 8);
    const auto t = build_cost_table({net}, shuffled, a);
    EXPECT_EQ(t.sus, sus);
    ASSERT_EQ(t.networks.size(), 1u);
    EXPECT_EQ(t.networks[0].costs.size(), 2u);
    EXPECT_EQ(t.networks[0].costs[1].size(), sus.size());
    EXPECT_EQ(t.at("n", 2, sus[3]), layer_cost(net.layers[1], sus[3], a));
    EXPECT_THROW(t.at("n", 9, sus[3]), PreconditionError);
    EXPECT_THROW(build_cost_table({net, net}, sus, a), ValidationError);
}

namespace {

const Network kTwoLayers{"net", {LayerShape::classical(1, 8, 8, 4, 4, 1, 1), LayerShape::classical(2, 8, 8, 4, 4, 1, 1)}};

nlohmann::json entry(const char* net, int layer, const char* su, double lat, double en) {
    return {{"network", net}, {"layer", layer}, {"su", su}, {"latency_cycles", lat}, {"energy", en}};
}

nlohmann::json six_rows() {
    nlohmann::json e = nlohmann::json::array();
    for (int l : {1, 2})
        for (const char* su : {"K=8", "C=8", "OX=4,K=2"}) e.push_back(entry("net", l, su, 10.0 * l, 3.0));
    return {{"entries", e}};
}

} // namespace

TEST(CostTableImport, CompleteGrid) {
    const auto t = import_cost_table_json(six_rows(), {kTwoLayers});
    EXPECT_EQ(t.provenance, Provenance::imported);
    EXPECT_EQ(t.sus.size(), 3u);
    EXPECT_DOUBLE_EQ(t.at("net", 2, parse_su("C=8")).latency, 20.0);
}

TEST(CostTableImport, MissingCellIsError) {
    auto doc = six_rows();
    doc["entries"].erase(doc["entries"].begin() + 4);
    EXPECT_THROW(import_cost_table_json(doc, {kTwoLayers}), ValidationError);
}

TEST(CostTableImport, SchemaErrors) {
    auto neg = six_rows();
    neg["entries"][0]["energy"] = -1.0;
    EXPECT_THROW(import_cost_table_json(neg, {kTwoLayers}), ValidationError);
    auto dup = six_rows();
    dup["entries"].push_back(dup["entries"][0]);
    EXPECT_THROW(import_cost_table_json(dup, {kTwoLayers}), ValidationError);
    auto unknown_net = six_rows();
    unknown_net["entries"][0]["network"] = "other";
    EXPECT_THROW(import_cost_table_json(unknown_net, {kTwoLayers}), ValidationError);
    auto unknown_layer = six_rows();
    unknown_layer["entries"][0]["layer"] = 7;
    EXPECT_THROW(import_cost_table_json(unknown_layer, {kTwoLayers}), ValidationError);
    auto missing_field = six_rows();
    missing_field["entries"][0].erase("energy");
    EXPECT_THROW(import_cost_table_json(missing_field, {kTwoLayers}), ValidationError);
    auto wrong_type = six_rows();
    wrong_type["entries"][0]["latency_cycles"] = "ten";
    EXPECT_THROW(import_cost_table_json(wrong_type, {kTwoLayers}), ValidationError);
    EXPECT_THROW(import_cost_table_json(nlohmann::json::object(), {kTwoLayers}), ValidationError);
    auto bad_su = six_rows();
    bad_su["entries"][0]["su"] = "Q=2";
    EXPECT_THROW(import_cost_table_json(bad_su, {kTwoLayers}), ParseError);
}

TEST(CostTableImport, RowsOutsideRequestedSusIgnored) {
    const auto t = import_cost_table_json(six_rows(), {kTwoLayers}, {parse_su("K=8"), parse_su("C=8")});
    EXPECT_EQ(t.sus.size(), 2u);
    EXPECT_THROW(import_cost_table_json(six_rows(), {kTwoLayers}, {parse_su("OY=8")}), ValidationError);
}

TEST(CostTableImport, RoundTripOfInternalTable) {
    const auto a = ports(32, 32, 32, 8);
    const auto t = build_cost_table({kTwoLayers}, enumerate_sus(8), a);
    const auto back = import_cost_table_json(cost_table_to_json(t), {kTwoLayers});
    EXPECT_EQ(back.sus, t.sus);
    for (std::size_t l = 0; l < 2; ++l)
        for (std::size_t s = 0; s < t.sus.size(); ++s)
            EXPECT_EQ(back.networks[0].costs[l][s], t.networks[0].costs[l][s]);
}
