#pragma once

// Per-(layer, SU) cost model: spatial and temporal PE utilization, latency
// and a per-access energy estimate, plus the cost table that feeds the
// explorer (built internally or imported from an external estimator).

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "coac/arch.hpp"
#include "coac/error.hpp"
#include "coac/su_space.hpp"
#include "coac/workload.hpp"

namespace coac {

/// Fraction of PEs doing useful work: product over dims of d / (d_u * ceil(d / d_u)).
/// Accepts arbitrary positive factors.
inline double spatial_utilization(const LayerShape& layer, const SpatialUnrolling& su) noexcept {
    double util = 1.0;
    for (auto d : kAllDims) {
        const auto bound = layer[d];
        const auto unroll = su[d];
        util *= static_cast<double>(bound) /
                static_cast<double>(unroll * detail::ceil_div(bound, unroll));
    }
    return util;
}

/// Number of spatial passes, product over dims of ceil(d / d_u).
inline std::int64_t spatial_iterations(const LayerShape& layer, const SpatialUnrolling& su) noexcept {
    std::int64_t it = 1;
    for (auto d : kAllDims) it *= detail::ceil_div(layer[d], su[d]);
    return it;
}

/// Bits fetched/stored per cycle when every operand is refreshed.
struct DataNeeds {
    std::int64_t w_bits = 0;
    std::int64_t i_bits = 0;
    std::int64_t o_bits = 0;

    friend bool operator==(const DataNeeds&, const DataNeeds&) = default;
};

/// G_u enters all three terms so depthwise SUs are covered; with G_u = 1
/// these are the classical-layer forms.
inline DataNeeds data_needs(const SpatialUnrolling& su, std::int64_t p_bits) noexcept {
    return {
        .w_bits = p_bits * su.c() * su.k() * su.fx() * su.fy() * su.g(),
        .i_bits = p_bits * su.c() * su.g() * (su.ox() + su.fx() - 1) * (su.oy() + su.fy() - 1),
        .o_bits = 2 * p_bits * su.k() * su.g() * su.ox() * su.oy(),
    };
}

/// Candidate innermost temporal loops, in tie-break priority order.
enum class Loop : std::uint8_t { C, K, OX, OY, G };

inline constexpr std::array<Loop, 5> kInnermostOrder = {Loop::C, Loop::K, Loop::OX, Loop::OY,
                                                        Loop::G};

constexpr std::string_view name_of(Loop l) noexcept {
    constexpr std::array<std::string_view, 5> names = {"C", "K", "OX", "OY", "G"};
    return names[static_cast<std::size_t>(l)];
}

constexpr Dim dim_of(Loop l) noexcept {
    switch (l) {
    case Loop::C: return Dim::C;
    case Loop::K: return Dim::K;
    case Loop::OX: return Dim::OX;
    case Loop::OY: return Dim::OY;
    case Loop::G: return Dim::G;
    }
    return Dim::G;
}

/// Which memory ports must stream every cycle for a given innermost loop;
/// the operand whose port is absent stays stationary.
struct PortUse {
    bool weights;
    bool inputs;
    bool outputs;
};

constexpr PortUse ports_for(Loop l) noexcept {
    switch (l) {
    case Loop::C: return {true, true, false};
    case Loop::K: return {true, false, true};
    case Loop::OX:
    case Loop::OY: return {false, true, true};
    case Loop::G: return {true, true, true};
    }
    return {true, true, true};
}

inline double temporal_utilization(const SpatialUnrolling& su, const ArchConfig& arch,
                                   Loop innermost) noexcept {
    const auto need = data_needs(su, arch.p_bits);
    const auto use = ports_for(innermost);
    double t = 1.0;
    if (use.weights) t = std::min(t, static_cast<double>(arch.pw_w_bits) / static_cast<double>(need.w_bits));
    if (use.inputs) t = std::min(t, static_cast<double>(arch.pw_i_bits) / static_cast<double>(need.i_bits));
    if (use.outputs) t = std::min(t, static_cast<double>(arch.pw_o_bits) / static_cast<double>(need.o_bits));
    return t;
}

/// Innermost-loop name as accepted on the command line / in reports.
inline Loop parse_loop(std::string_view text) {
    for (auto l : kInnermostOrder)
        if (name_of(l) == text) return l;
    throw PreconditionError("unsupported innermost loop '" + std::string(text) +
                            "' (expected C, K, OX, OY or G)");
}

struct TemporalChoice {
    Loop innermost = Loop::G;
    double t_ut = 1.0;
    bool single_pass = false; ///< no loop had temporal iterations left

    friend bool operator==(const TemporalChoice&, const TemporalChoice&) = default;
};

/// Picks the innermost loop with the highest temporal utilization among the
/// loops that still iterate in time. Ties resolve in C, K, OX, OY, G order.
inline TemporalChoice best_temporal(const LayerShape& layer, const SpatialUnrolling& su,
                                    const ArchConfig& arch) noexcept {
    std::optional<TemporalChoice> best;
    for (auto loop : kInnermostOrder) {
        const auto d = dim_of(loop);
        if (detail::ceil_div(layer[d], su[d]) <= 1) continue;
        const double t = temporal_utilization(su, arch, loop);
        if (!best || t > best->t_ut) best = TemporalChoice{loop, t, false};
    }
    if (best) return *best;
    return {Loop::G, temporal_utilization(su, arch, Loop::G), true};
}

struct CostPoint {
    double latency = 0.0; ///< cycles
    double energy = 0.0;  ///< abstract energy units

    friend bool operator==(const CostPoint&, const CostPoint&) = default;
};

/// Everything layer_cost derives, for reporting.
struct LayerEvaluation {
    CostPoint cost;
    double s_ut = 1.0;
    TemporalChoice temporal;
    std::int64_t spatial_iterations = 1;
};

namespace detail {

/// ceil(a * b / c) for non-negative integers without intermediate overflow
/// at the magnitudes used here.
inline std::int64_t mul_ceil_div(std::int64_t a, std::int64_t b, std::int64_t c) noexcept {
    const auto num = static_cast<__int128>(a) * b;
    return static_cast<std::int64_t>((num + c - 1) / c);
}

} // namespace detail

/// Latency: spatial passes stretched by the port-limited temporal utilization,
/// rounded up once per layer. Energy: MACs plus per-word port traffic, where
/// the stationary operand is fetched once per unique word.
inline LayerEvaluation evaluate_layer(const LayerShape& layer, const SpatialUnrolling& su,
                                      const ArchConfig& arch) noexcept {
    LayerEvaluation ev;
    ev.s_ut = spatial_utilization(layer, su);
    ev.spatial_iterations = spatial_iterations(layer, su);
    ev.temporal = best_temporal(layer, su, arch);

    const auto iters = ev.spatial_iterations;
    const auto need = data_needs(su, arch.p_bits);
    const auto use = ports_for(ev.temporal.innermost);

    // Exact form of ceil(iters / T_ut) with T_ut = min(1, PW / need, ...).
    std::int64_t cycles = iters;
    if (use.weights) cycles = std::max(cycles, detail::mul_ceil_div(iters, need.w_bits, arch.pw_w_bits));
    if (use.inputs) cycles = std::max(cycles, detail::mul_ceil_div(iters, need.i_bits, arch.pw_i_bits));
    if (use.outputs) cycles = std::max(cycles, detail::mul_ceil_div(iters, need.o_bits, arch.pw_o_bits));
    ev.cost.latency = static_cast<double>(cycles);

    const double w_words_cycle = static_cast<double>(su.g() * su.c() * su.k() * su.fx() * su.fy());
    const double i_words_cycle =
        static_cast<double>(su.g() * su.c() * (su.ox() + su.fx() - 1) * (su.oy() + su.fy() - 1));
    const double o_words_cycle = static_cast<double>(su.g() * su.k() * su.ox() * su.oy());

    const double w_unique = static_cast<double>(layer[Dim::G] * layer[Dim::C] * layer[Dim::K] *
                                                layer[Dim::FX] * layer[Dim::FY]);
    const double i_unique =
        static_cast<double>(layer[Dim::G] * layer[Dim::C] * layer.ix() * layer.iy());
    const double o_unique =
        static_cast<double>(layer[Dim::G] * layer[Dim::K] * layer[Dim::OX] * layer[Dim::OY]);

    const double it = static_cast<double>(iters);
    const auto& e = arch.energy;
    double energy = e.mac * static_cast<double>(layer_macs(layer));
    energy += e.weight_read * (use.weights ? w_words_cycle * it : w_unique);
    energy += e.input_read * (use.inputs ? i_words_cycle * it : i_unique);
    energy += e.output_write * (use.outputs ? o_words_cycle * it : o_unique);
    ev.cost.energy = energy;
    return ev;
}

inline CostPoint layer_cost(const LayerShape& layer, const SpatialUnrolling& su,
                            const ArchConfig& arch) noexcept {
    return evaluate_layer(layer, su, arch).cost;
}

enum class Provenance : std::uint8_t { internal, imported };

constexpr std::string_view name_of(Provenance p) noexcept {
    return p == Provenance::internal ? "internal" : "imported";
}

/// Dense (layer x SU) costs for one network.
struct NetworkCosts {
    std::string name;
    std::vector<int> layer_ids;
    std::vector<std::vector<CostPoint>> costs; ///< [layer index][su index]
};

/// Costs over the complete (networks x layers x candidate SUs) grid.
struct CostTable {
    Provenance provenance = Provenance::internal;
    std::vector<SpatialUnrolling> sus;
    std::vector<NetworkCosts> networks;

    std::optional<std::size_t> su_index(const SpatialUnrolling& su) const {
        const auto it = std::lower_bound(sus.begin(), sus.end(), su);
        if (it == sus.end() || *it != su) return std::nullopt;
        return static_cast<std::size_t>(it - sus.begin());
    }

    const CostPoint& at(std::string_view network, int layer_id, const SpatialUnrolling& su) const {
        const auto s = su_index(su);
        if (!s) throw PreconditionError("cost table has no SU " + display_name(su));
        for (const auto& n : networks) {
            if (n.name != network) continue;
            for (std::size_t l = 0; l < n.layer_ids.size(); ++l)
                if (n.layer_ids[l] == layer_id) return n.costs[l][*s];
        }
        throw PreconditionError("cost table has no layer " + std::to_string(layer_id) +
                                " of network '" + std::string(network) + "'");
    }
};

namespace detail {

inline std::vector<SpatialUnrolling> sorted_unique(std::vector<SpatialUnrolling> sus) {
    std::sort(sus.begin(), sus.end());
    sus.erase(std::unique(sus.begin(), sus.end()), sus.end());
    return sus;
}

inline void check_network_names(const std::vector<Network>& networks) {
    for (std::size_t i = 0; i < networks.size(); ++i)
        for (std::size_t j = 0; j < i; ++j)
            if (networks[i].name == networks[j].name)
                throw ValidationError("duplicate network name '" + networks[i].name + "'");
}

} // namespace detail

/// Evaluates the internal model over every (layer, SU) pair.
inline CostTable build_cost_table(const std::vector<Network>& networks,
                                  std::vector<SpatialUnrolling> sus, const ArchConfig& arch) {
    detail::check_network_names(networks);
    CostTable table;
    table.provenance = Provenance::internal;
    table.sus = detail::sorted_unique(std::move(sus));
    for (const auto& net : networks) {
        NetworkCosts nc;
        nc.name = net.name;
        for (const auto& layer : net.layers) {
            nc.layer_ids.push_back(layer.id);
            auto& row = nc.costs.emplace_back();
            row.reserve(table.sus.size());
            for (const auto& su : table.sus) row.push_back(layer_cost(layer, su, arch));
        }
        table.networks.push_back(std::move(nc));
    }
    return table;
}

/// Reads a cost table and checks it covers the grid. With `sus` empty, the
/// grid's SU axis is the set of SUs present in the file; otherwise rows for
/// SUs outside `sus` are ignored.
inline CostTable import_cost_table_json(const nlohmann::json& doc, const std::vector<Network>& networks,
                                        std::vector<SpatialUnrolling> sus = {}) {
    detail::check_network_names(networks);
    if (!doc.is_object() || !doc.contains("entries") || !doc.at("entries").is_array())
        throw ValidationError("cost table: missing 'entries' array");

    struct Row {
        std::string network;
        int layer;
        SpatialUnrolling su;
        CostPoint cost;
    };
    std::vector<Row> rows;
    for (const auto& e : doc.at("entries")) {
        if (!e.is_object()) throw ValidationError("cost table: entries must be objects");
        for (const char* key : {"network", "layer", "su", "latency_cycles", "energy"})
            if (!e.contains(key)) throw ValidationError(std::string("cost table: entry missing '") + key + "'");
        if (!e.at("network").is_string() || !e.at("layer").is_number_integer() ||
            !e.at("su").is_string() || !e.at("latency_cycles").is_number() ||
            !e.at("energy").is_number())
            throw ValidationError("cost table: entry has a field of the wrong type");
        Row r{e.at("network").get<std::string>(), e.at("layer").get<int>(),
              parse_su(e.at("su").get<std::string>(), FactorRule::any_positive),
              {e.at("latency_cycles").get<double>(), e.at("energy").get<double>()}};
        if (!(r.cost.latency >= 0) || !(r.cost.energy >= 0) || !std::isfinite(r.cost.latency) ||
            !std::isfinite(r.cost.energy))
            throw ValidationError("cost table: negative or non-finite cost for layer " +
                                  std::to_string(r.layer) + " su " + display_name(r.su));
        rows.push_back(std::move(r));
    }

    CostTable table;
    table.provenance = Provenance::imported;
    if (sus.empty()) {
        for (const auto& r : rows) sus.push_back(r.su);
    }
    table.sus = detail::sorted_unique(std::move(sus));
    if (table.sus.empty()) throw ValidationError("cost table: no SUs");

    std::vector<std::vector<std::vector<bool>>> filled;
    for (const auto& net : networks) {
        NetworkCosts nc;
        nc.name = net.name;
        for (const auto& layer : net.layers) nc.layer_ids.push_back(layer.id);
        nc.costs.assign(net.layers.size(), std::vector<CostPoint>(table.sus.size()));
        filled.emplace_back(net.layers.size(), std::vector<bool>(table.sus.size(), false));
        table.networks.push_back(std::move(nc));
    }
    for (const auto& r : rows) {
        const auto s = table.su_index(r.su);
        if (!s) continue;
        std::size_t n = 0;
        while (n < table.networks.size() && table.networks[n].name != r.network) ++n;
        if (n == table.networks.size())
            throw ValidationError("cost table: unknown network '" + r.network + "'");
        const auto& ids = table.networks[n].layer_ids;
        const auto it = std::find(ids.begin(), ids.end(), r.layer);
        if (it == ids.end())
            throw ValidationError("cost table: network '" + r.network + "' has no layer " +
                                  std::to_string(r.layer));
        const auto l = static_cast<std::size_t>(it - ids.begin());
        if (filled[n][l][*s])
            throw ValidationError("cost table: duplicate entry for network '" + r.network +
                                  "' layer " + std::to_string(r.layer) + " su " + display_name(r.su));
        filled[n][l][*s] = true;
        table.networks[n].costs[l][*s] = r.cost;
    }
    for (std::size_t n = 0; n < table.networks.size(); ++n)
        for (std::size_t l = 0; l < filled[n].size(); ++l)
            for (std::size_t s = 0; s < table.sus.size(); ++s)
                if (!filled[n][l][s])
                    throw ValidationError("cost table: incomplete grid, missing network '" +
                                          table.networks[n].name + "' layer " +
                                          std::to_string(table.networks[n].layer_ids[l]) + " su " +
                                          display_name(table.sus[s]));
    return table;
}

inline CostTable import_cost_table(const std::filesystem::path& path,
                                   const std::vector<Network>& networks,
                                   std::vector<SpatialUnrolling> sus = {}) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open cost table " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(ss.str());
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
    return import_cost_table_json(doc, networks, std::move(sus));
}

/// Serializes in the import schema; rows are ordered network, layer, SU.
inline nlohmann::json cost_table_to_json(const CostTable& table) {
    nlohmann::json entries = nlohmann::json::array();
    for (const auto& n : table.networks)
        for (std::size_t l = 0; l < n.layer_ids.size(); ++l)
            for (std::size_t s = 0; s < table.sus.size(); ++s)
                entries.push_back({{"network", n.name},
                                   {"layer", n.layer_ids[l]},
                                   {"su", to_string(table.sus[s])},
                                   {"latency_cycles", n.costs[l][s].latency},
                                   {"energy", n.costs[l][s].energy}});
    return {{"provenance", name_of(table.provenance)}, {"entries", std::move(entries)}};
}

} // namespace coac
