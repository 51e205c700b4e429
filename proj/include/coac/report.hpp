#pragma once

// Serialization of exploration results: JSON report, CSV front and
// whitespace-separated plot data. Output depends only on the inputs.

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"

#include "coac/arch.hpp"
#include "coac/explorer.hpp"
#include "coac/flex_overhead.hpp"
#include "coac/su_space.hpp"
#include "coac/workload.hpp"

namespace coac {

/// Shortest text that reads back to the same double.
inline std::string format_number(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

inline nlohmann::json su_to_json(const SpatialUnrolling& su) {
    const auto d = su_derived(su);
    nlohmann::json j = {{"su", to_string(su)}};
    for (auto dim : kAllDims) j[std::string(name_of(dim))] = su[dim];
    j["O_sum"] = d.o_sum;
    j["W_u"] = d.w_u;
    j["A_u"] = d.a_u;
    return j;
}

inline nlohmann::json options_to_json(const ExploreOptions& o) {
    return {{"max_sus", o.max_sus},
            {"prune", o.prune},
            {"include_smaller_sets", o.include_smaller_sets},
            {"reshuffle_energy", o.reshuffle_energy},
            {"epsilon", o.epsilon},
            {"area_axis", o.area_axis == AreaAxis::flex ? "flex" : "total"},
            {"subset_cap", o.subset_cap}};
}

inline std::string su_set_text(const CostTable& table, const std::vector<std::size_t>& set,
                               const char* sep = "|") {
    std::string out;
    for (std::size_t i = 0; i < set.size(); ++i) {
        if (i) out += sep;
        out += display_name(table.sus[set[i]]);
    }
    return out;
}

inline nlohmann::json solutions_to_json(const ExploreResult& res, const std::vector<Solution>& sols) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& sol : sols) {
        nlohmann::json s;
        s["su_set"] = nlohmann::json::array();
        for (auto i : sol.su_set) s["su_set"].push_back(display_name(res.table.sus[i]));
        s["overhead"] = overhead_to_json(sol.overhead);
        s["front"] = nlohmann::json::array();
        for (const auto& p : sol.front) {
            nlohmann::json a = nlohmann::json::array();
            for (auto i : p.assignment) a.push_back(display_name(res.table.sus[i]));
            s["front"].push_back({{"latency", p.cost.latency},
                                  {"energy", p.cost.energy},
                                  {"edp", p.edp()},
                                  {"area", p.area},
                                  {"assignment", std::move(a)}});
        }
        out.push_back(std::move(s));
    }
    return out;
}

/// Full report. `config` is the resolved run configuration to embed.
inline nlohmann::json explore_report(const ExploreResult& res, const nlohmann::json& config) {
    nlohmann::json layers = nlohmann::json::array();
    for (const auto& n : res.table.networks)
        for (auto id : n.layer_ids) layers.push_back({{"network", n.name}, {"layer", id}});

    nlohmann::json cands = nlohmann::json::array();
    for (auto i : res.candidates) cands.push_back(display_name(res.table.sus[i]));

    nlohmann::json by_size = nlohmann::json::object();
    for (const auto& [k, sols] : res.by_size) by_size[std::to_string(k)] = solutions_to_json(res, sols);

    return {{"config", config},
            {"statistics",
             {{"provenance", name_of(res.table.provenance)},
              {"normalized", res.normalized},
              {"l_best", res.l_best},
              {"candidates_before", res.candidates_before},
              {"candidates_after", res.candidates.size()},
              {"subsets_total", res.subsets_total},
              {"subsets_evaluated", res.subsets_evaluated},
              {"truncated", res.truncated}}},
            {"candidates", std::move(cands)},
            {"layers", std::move(layers)},
            {"solutions", solutions_to_json(res, res.solutions)},
            {"fronts_by_size", std::move(by_size)}};
}

/// One row per (solution, front point).
inline void write_front_csv(std::ostream& os, const ExploreResult& res, const std::vector<Solution>& sols) {
    os << "sus;area_flex;latency;energy;edp\n";
    for (const auto& sol : sols)
        for (const auto& p : sol.front)
            os << su_set_text(res.table, sol.su_set) << ';' << format_number(sol.overhead.area_flex) << ';'
               << format_number(p.cost.latency) << ';' << format_number(p.cost.energy) << ';'
               << format_number(p.edp()) << '\n';
}

/// Plot data for one set size: latency, energy, area per line.
inline void write_plot_data(std::ostream& os, const std::vector<Solution>& sols, int n) {
    os << "# N=" << n << "\n# latency energy area\n";
    std::vector<const SolutionPoint*> pts = all_points(sols);
    std::sort(pts.begin(), pts.end(), [](const SolutionPoint* a, const SolutionPoint* b) {
        if (a->cost.latency != b->cost.latency) return a->cost.latency < b->cost.latency;
        if (a->cost.energy != b->cost.energy) return a->cost.energy < b->cost.energy;
        return a->area < b->area;
    });
    for (const auto* p : pts)
        os << format_number(p->cost.latency) << ' ' << format_number(p->cost.energy) << ' '
           << format_number(p->area) << '\n';
}

} // namespace coac
