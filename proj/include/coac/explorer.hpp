#pragma once

// Search over combinations of SUs. For each candidate set the end-to-end
// (latency, energy) front is built layer by layer, the set's flexibility
// area is attached, and all sets are merged into one latency/energy/area
// Pareto front.

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "coac/arch.hpp"
#include "coac/error.hpp"
#include "coac/flex_overhead.hpp"
#include "coac/mapping_cost.hpp"
#include "coac/pareto.hpp"
#include "coac/su_space.hpp"
#include "coac/workload.hpp"

namespace coac {

enum class AreaAxis : std::uint8_t { flex, total };

struct ExploreOptions {
    int max_sus = 2;
    bool prune = true;
    bool include_smaller_sets = true;
    bool reshuffle_energy = false;
    double epsilon = 0.0;
    AreaAxis area_axis = AreaAxis::flex;
    std::uint64_t subset_cap = 20'000'000;
    unsigned jobs = 0; ///< 0: hardware concurrency
};

inline void validate_options(const ExploreOptions& o) {
    if (o.max_sus < 1) throw ValidationError("max_sus must be >= 1");
    if (!(o.epsilon >= 0)) throw ValidationError("epsilon must be >= 0");
}

/// SU indices refer to CostTable::sus throughout.
struct LayerParetoEntry {
    std::size_t su = 0;
    CostPoint cost;

    friend bool operator==(const LayerParetoEntry&, const LayerParetoEntry&) = default;
};

/// Non-dominated (SU, cost) pairs of one layer, ordered by latency, energy, SU.
inline std::vector<LayerParetoEntry> layer_pareto(std::span<const CostPoint> layer_costs,
                                                  std::span<const std::size_t> su_set,
                                                  double eps = 0.0) {
    std::vector<Objectives<2>> pts;
    pts.reserve(su_set.size());
    for (auto s : su_set) pts.push_back({layer_costs[s].latency, layer_costs[s].energy});
    const auto keep = pareto_indices<2>(
        std::span<const Objectives<2>>(pts),
        [&](std::size_t a, std::size_t b) { return su_set[a] < su_set[b]; }, eps);
    std::vector<LayerParetoEntry> out;
    for (auto i : keep) out.push_back({su_set[i], layer_costs[su_set[i]]});
    return out;
}

struct FrontPoint {
    CostPoint cost;
    std::vector<std::size_t> assignment; ///< SU per layer

    friend bool operator==(const FrontPoint&, const FrontPoint&) = default;
};

/// Extra energy for regrouping activations when consecutive layers run
/// under SUs whose data clusters do not align with the buffer port.
struct ReshuffleModel {
    std::span<const SpatialUnrolling> sus;  ///< indexed like the cost table
    std::int64_t pw_b_words = 1;
    double energy_per_word = 0.0;
    std::vector<double> words_out;          ///< output words of each layer

    bool needs_buffer(std::size_t from, std::size_t to) const noexcept {
        return reshuffle_cluster(sus[from], sus[to]) % pw_b_words != 0;
    }
};

inline ReshuffleModel make_reshuffle_model(const Network& net, std::span<const SpatialUnrolling> sus,
                                           const ArchConfig& arch, double scale = 1.0) {
    ReshuffleModel m;
    m.sus = sus;
    m.pw_b_words = arch.pw_b_words;
    m.energy_per_word = arch.energy.reshuffle * scale;
    for (const auto& l : net.layers)
        m.words_out.push_back(static_cast<double>(l[Dim::K] * l[Dim::G] * l[Dim::OX] * l[Dim::OY]));
    return m;
}

namespace detail {

struct FoldNode {
    double latency;
    double energy;
    std::size_t rank;   ///< lexicographic rank of the path among survivors of its stage
    std::int64_t parent;
    std::size_t id;     ///< option id chosen at this stage
};

/// Keeps the non-dominated candidates; ties go to the lexicographically
/// smallest path, given by (parent rank, option id).
inline std::vector<FoldNode> filter_stage(std::vector<FoldNode>& cand,
                                          const std::vector<FoldNode>& prev, double eps,
                                          const std::vector<std::size_t>* subset = nullptr) {
    std::vector<Objectives<2>> pts;
    pts.reserve(cand.size());
    for (const auto& c : cand) pts.push_back({c.latency, c.energy});
    auto key = [&](std::size_t i) {
        const auto pr = cand[i].parent < 0 ? std::size_t{0} : prev[static_cast<std::size_t>(cand[i].parent)].rank;
        return std::pair{pr, cand[i].id};
    };
    std::vector<std::size_t> idx;
    if (subset) {
        // filter within a group only
        std::vector<Objectives<2>> sub;
        for (auto i : *subset) sub.push_back(pts[i]);
        auto kept = pareto_indices<2>(
            std::span<const Objectives<2>>(sub),
            [&](std::size_t a, std::size_t b) { return key((*subset)[a]) < key((*subset)[b]); }, eps);
        for (auto k : kept) idx.push_back((*subset)[k]);
    } else {
        idx = pareto_indices<2>(
            std::span<const Objectives<2>>(pts),
            [&](std::size_t a, std::size_t b) { return key(a) < key(b); }, eps);
    }
    std::vector<FoldNode> out;
    for (auto i : idx) out.push_back(cand[i]);
    return out;
}

inline void assign_ranks(std::vector<FoldNode>& nodes, const std::vector<FoldNode>& prev) {
    std::vector<std::size_t> order(nodes.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    auto key = [&](std::size_t i) {
        const auto pr = nodes[i].parent < 0 ? std::size_t{0} : prev[static_cast<std::size_t>(nodes[i].parent)].rank;
        return std::pair{pr, nodes[i].id};
    };
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return key(a) < key(b); });
    for (std::size_t r = 0; r < order.size(); ++r) nodes[order[r]].rank = r;
}

struct StageOption {
    CostPoint cost;
    std::size_t id;
};

/// Minkowski-sum fold of per-stage option lists with Pareto filtering after
/// every stage. Returns, per surviving end point, the chosen option ids.
inline std::vector<std::pair<CostPoint, std::vector<std::size_t>>> fold_stages(
    const std::vector<std::vector<StageOption>>& stages, double eps) {
    std::vector<std::vector<FoldNode>> levels;
    std::vector<FoldNode> empty;
    for (std::size_t s = 0; s < stages.size(); ++s) {
        std::vector<FoldNode> cand;
        if (s == 0) {
            for (const auto& o : stages[s]) cand.push_back({o.cost.latency, o.cost.energy, 0, -1, o.id});
            auto kept = filter_stage(cand, empty, eps);
            assign_ranks(kept, empty);
            levels.push_back(std::move(kept));
            continue;
        }
        const auto& prev = levels.back();
        cand.reserve(prev.size() * stages[s].size());
        for (std::size_t p = 0; p < prev.size(); ++p)
            for (const auto& o : stages[s])
                cand.push_back({prev[p].latency + o.cost.latency, prev[p].energy + o.cost.energy, 0,
                                static_cast<std::int64_t>(p), o.id});
        auto kept = filter_stage(cand, prev, eps);
        assign_ranks(kept, prev);
        levels.push_back(std::move(kept));
    }
    std::vector<std::pair<CostPoint, std::vector<std::size_t>>> out;
    if (levels.empty()) return out;
    for (const auto& end : levels.back()) {
        std::vector<std::size_t> ids(levels.size());
        const FoldNode* n = &end;
        for (std::size_t s = levels.size(); s-- > 0;) {
            ids[s] = n->id;
            if (n->parent >= 0) n = &levels[s - 1][static_cast<std::size_t>(n->parent)];
        }
        out.push_back({{end.latency, end.energy}, std::move(ids)});
    }
    return out;
}

} // namespace detail

/// End-to-end (latency, energy) front of one network when every layer may
/// pick any SU of `su_set`. Points are ordered by latency, energy, then
/// assignment; among equal points the lexicographically smallest
/// assignment is kept.
inline std::vector<FrontPoint> network_pareto(const NetworkCosts& net, std::span<const std::size_t> su_set,
                                              double eps = 0.0,
                                              const ReshuffleModel* reshuffle = nullptr) {
    if (su_set.empty()) throw PreconditionError("network_pareto: empty SU set");
    const auto n_layers = net.costs.size();
    std::vector<FrontPoint> out;
    if (n_layers == 0) return out;

    if (!reshuffle) {
        std::vector<std::vector<detail::StageOption>> stages;
        for (const auto& row : net.costs) {
            auto& st = stages.emplace_back();
            for (const auto& e : layer_pareto(row, su_set, eps)) st.push_back({e.cost, e.su});
        }
        for (auto& [cost, ids] : detail::fold_stages(stages, eps)) out.push_back({cost, std::move(ids)});
        return out;
    }

    // Transition energy depends on the previous SU, so partial paths are
    // only comparable when they end in the same SU.
    std::vector<std::vector<detail::FoldNode>> levels;
    std::vector<detail::FoldNode> empty;
    for (std::size_t l = 0; l < n_layers; ++l) {
        std::vector<detail::FoldNode> cand;
        std::vector<std::vector<std::size_t>> groups(su_set.size());
        const auto& row = net.costs[l];
        if (l == 0) {
            for (std::size_t g = 0; g < su_set.size(); ++g) {
                groups[g].push_back(cand.size());
                cand.push_back({row[su_set[g]].latency, row[su_set[g]].energy, 0, -1, su_set[g]});
            }
        } else {
            const auto& prev = levels.back();
            for (std::size_t g = 0; g < su_set.size(); ++g) {
                const auto s = su_set[g];
                for (std::size_t p = 0; p < prev.size(); ++p) {
                    double e = prev[p].energy + row[s].energy;
                    if (reshuffle->needs_buffer(prev[p].id, s))
                        e += reshuffle->energy_per_word * reshuffle->words_out[l - 1];
                    groups[g].push_back(cand.size());
                    cand.push_back({prev[p].latency + row[s].latency, e, 0, static_cast<std::int64_t>(p), s});
                }
            }
        }
        const auto& prev = l == 0 ? empty : levels.back();
        std::vector<detail::FoldNode> kept;
        for (const auto& g : groups) {
            auto part = detail::filter_stage(cand, prev, eps, &g);
            kept.insert(kept.end(), part.begin(), part.end());
        }
        detail::assign_ranks(kept, prev);
        levels.push_back(std::move(kept));
    }
    // Final front across end SUs.
    auto& last = levels.back();
    const auto& before = n_layers > 1 ? levels[n_layers - 2] : empty;
    auto final_nodes = detail::filter_stage(last, before, eps);
    for (const auto& end : final_nodes) {
        std::vector<std::size_t> ids(n_layers);
        const detail::FoldNode* n = &end;
        for (std::size_t s = n_layers; s-- > 0;) {
            ids[s] = n->id;
            if (n->parent >= 0) n = &levels[s - 1][static_cast<std::size_t>(n->parent)];
        }
        out.push_back({{end.latency, end.energy}, std::move(ids)});
    }
    return out;
}

/// Sum of the per-layer costs of an assignment, accumulated in layer order
/// (the same association network_pareto uses).
inline CostPoint assignment_cost(const NetworkCosts& net, std::span<const std::size_t> assignment,
                                 const ReshuffleModel* reshuffle = nullptr) {
    CostPoint c;
    for (std::size_t l = 0; l < assignment.size(); ++l) {
        const auto& x = net.costs[l][assignment[l]];
        if (l == 0) {
            c = x;
            continue;
        }
        c.latency = c.latency + x.latency;
        double e = c.energy + x.energy;
        if (reshuffle && reshuffle->needs_buffer(assignment[l - 1], assignment[l]))
            e += reshuffle->energy_per_word * reshuffle->words_out[l - 1];
        c.energy = e;
    }
    return c;
}

/// SUs that are latency-best or energy-best for at least one layer of any
/// network. Ties keep every tied SU. Result is in table order.
inline std::vector<std::size_t> prune_sus(const CostTable& table,
                                          std::span<const std::size_t> candidates) {
    if (candidates.empty()) return {};
    std::vector<bool> keep(table.sus.size(), false);
    for (const auto& net : table.networks)
        for (const auto& row : net.costs) {
            double best_l = std::numeric_limits<double>::infinity();
            double best_e = std::numeric_limits<double>::infinity();
            for (auto s : candidates) {
                best_l = std::min(best_l, row[s].latency);
                best_e = std::min(best_e, row[s].energy);
            }
            for (auto s : candidates)
                if (row[s].latency == best_l || row[s].energy == best_e) keep[s] = true;
        }
    std::vector<std::size_t> out;
    for (auto s : candidates)
        if (keep[s]) out.push_back(s);
    std::sort(out.begin(), out.end());
    return out;
}

inline std::vector<std::size_t> prune_sus(const CostTable& table) {
    std::vector<std::size_t> all(table.sus.size());
    std::iota(all.begin(), all.end(), std::size_t{0});
    return prune_sus(table, all);
}

/// Best single-SU whole-network latency of each network.
inline std::vector<double> best_single_su_latency(const CostTable& table) {
    std::vector<double> out;
    for (const auto& net : table.networks) {
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t s = 0; s < table.sus.size(); ++s) {
            double total = 0.0;
            for (const auto& row : net.costs) total += row[s].latency;
            best = std::min(best, total);
        }
        out.push_back(best);
    }
    return out;
}

/// Divides every latency and energy of a network by its best single-SU
/// latency, so each network's best single-SU relative latency is 1.
inline CostTable normalize_networks(const CostTable& table) {
    CostTable out = table;
    const auto l_best = best_single_su_latency(table);
    for (std::size_t n = 0; n < out.networks.size(); ++n) {
        if (!(l_best[n] > 0))
            throw PreconditionError("network '" + out.networks[n].name +
                                    "' has zero best latency; cannot normalize");
        for (auto& row : out.networks[n].costs)
            for (auto& c : row) {
                c.latency /= l_best[n];
                c.energy /= l_best[n];
            }
    }
    return out;
}

struct SolutionPoint {
    CostPoint cost;
    double area = 0.0;
    /// SU index per layer, networks concatenated in input order.
    std::vector<std::size_t> assignment;

    double edp() const noexcept { return cost.latency * cost.energy; }
};

struct Solution {
    std::vector<std::size_t> su_set;
    OverheadReport overhead;
    std::vector<SolutionPoint> front;
};

struct ExploreResult {
    CostTable table; ///< as explored (normalized for multi-network suites)
    bool normalized = false;
    std::vector<double> l_best;
    std::size_t candidates_before = 0;
    std::vector<std::size_t> candidates; ///< after pruning
    std::uint64_t subsets_total = 0;
    std::uint64_t subsets_evaluated = 0;
    bool truncated = false;
    std::vector<Solution> solutions;                 ///< latency/energy/area front over all sets
    std::map<int, std::vector<Solution>> by_size;    ///< same, restricted to sets of exactly N SUs
};

namespace detail {

inline std::uint64_t binomial(std::uint64_t n, std::uint64_t k) noexcept {
    if (k > n) return 0;
    k = std::min(k, n - k);
    unsigned __int128 r = 1;
    for (std::uint64_t i = 1; i <= k; ++i) {
        r = r * (n - k + i) / i;
        if (r > std::numeric_limits<std::uint64_t>::max()) return std::numeric_limits<std::uint64_t>::max();
    }
    return static_cast<std::uint64_t>(r);
}

/// k-combination of {0..n-1} with lexicographic rank `rank`.
inline std::vector<std::size_t> unrank_combination(std::uint64_t rank, std::size_t n, std::size_t k) {
    std::vector<std::size_t> out;
    std::size_t next = 0;
    for (std::size_t pos = 0; pos < k; ++pos) {
        for (std::size_t v = next; v < n; ++v) {
            const auto count = binomial(n - v - 1, k - pos - 1);
            if (rank < count) {
                out.push_back(v);
                next = v + 1;
                break;
            }
            rank -= count;
        }
    }
    return out;
}

inline bool next_combination(std::vector<std::size_t>& c, std::size_t n) {
    const auto k = c.size();
    for (std::size_t i = k; i-- > 0;) {
        if (c[i] < n - k + i) {
            ++c[i];
            for (std::size_t j = i + 1; j < k; ++j) c[j] = c[j - 1] + 1;
            return true;
        }
    }
    return false;
}

struct Candidate {
    Objectives<3> obj;
    CostPoint cost;
    int size;
    std::vector<std::size_t> subset;     ///< SU indices
    std::vector<std::size_t> assignment;
};

inline bool tie_less(const Candidate& a, const Candidate& b) {
    if (a.assignment != b.assignment) return a.assignment < b.assignment;
    return a.subset < b.subset;
}

inline std::vector<Candidate> filter_candidates(std::vector<Candidate> in, double eps) {
    std::vector<Objectives<3>> pts;
    pts.reserve(in.size());
    for (const auto& c : in) pts.push_back(c.obj);
    const auto keep = pareto_indices<3>(
        std::span<const Objectives<3>>(pts),
        [&](std::size_t a, std::size_t b) { return tie_less(in[a], in[b]); }, eps);
    std::vector<Candidate> out;
    out.reserve(keep.size());
    for (auto i : keep) out.push_back(std::move(in[i]));
    return out;
}

/// One subset-size class and a contiguous rank range inside it.
struct Chunk {
    int size;
    std::uint64_t first_rank;
    std::uint64_t count;
};

} // namespace detail

/// Evaluates one SU set over the suite: per-network fronts combined into a
/// suite front (networks summed in input order).
inline std::vector<FrontPoint> suite_front(const CostTable& table, std::span<const std::size_t> su_set,
                                           double eps, std::span<const ReshuffleModel> reshuffle = {}) {
    std::vector<std::vector<FrontPoint>> per_net;
    for (std::size_t n = 0; n < table.networks.size(); ++n)
        per_net.push_back(network_pareto(table.networks[n], su_set, eps,
                                         reshuffle.empty() ? nullptr : &reshuffle[n]));
    if (per_net.size() == 1) return std::move(per_net.front());

    std::vector<std::vector<detail::StageOption>> stages;
    std::vector<std::vector<std::size_t>> by_rank; // rank -> index into the network front
    for (const auto& front : per_net) {
        // Option id = lexicographic rank of the network's assignment.
        auto& order = by_rank.emplace_back(front.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::sort(order.begin(), order.end(),
                  [&](std::size_t a, std::size_t b) { return front[a].assignment < front[b].assignment; });
        auto& st = stages.emplace_back();
        for (std::size_t r = 0; r < order.size(); ++r) st.push_back({front[order[r]].cost, r});
    }
    std::vector<FrontPoint> out;
    for (auto& [cost, ids] : detail::fold_stages(stages, eps)) {
        FrontPoint fp{cost, {}};
        for (std::size_t n = 0; n < ids.size(); ++n) {
            const auto& a = per_net[n][by_rank[n][ids[n]]].assignment;
            fp.assignment.insert(fp.assignment.end(), a.begin(), a.end());
        }
        out.push_back(std::move(fp));
    }
    return out;
}

/// Full search. With `imported` the candidate SUs are the table's SUs;
/// otherwise every SU of the array admitted by `constraints` is evaluated
/// with the internal cost model.
inline ExploreResult explore(const ArchConfig& arch, const std::vector<Network>& networks,
                             const ExploreOptions& options, const CostTable* imported = nullptr,
                             const SuConstraints& constraints = {}) {
    validate_arch(arch);
    validate_options(options);
    if (networks.empty()) throw ValidationError("explore: no networks");
    for (const auto& n : networks) validate_network(n);

    ExploreResult res;
    CostTable raw;
    if (imported) {
        raw = *imported;
        for (const auto& su : raw.sus)
            if (!su.all_powers_of_two() || su.pe_count() != arch.nb_pes)
                throw ValidationError("explore: imported SU " + display_name(su) +
                                      " is not a power-of-2 factorization of " +
                                      std::to_string(arch.nb_pes) + " PEs");
        if (raw.networks.size() != networks.size())
            throw ValidationError("explore: imported table does not match the workloads");
    } else {
        raw = build_cost_table(networks, enumerate_sus(arch.nb_pes, constraints), arch);
    }
    res.normalized = networks.size() > 1;
    res.l_best = best_single_su_latency(raw);
    res.table = res.normalized ? normalize_networks(raw) : std::move(raw);
    const auto& table = res.table;

    std::vector<std::size_t> all(table.sus.size());
    std::iota(all.begin(), all.end(), std::size_t{0});
    res.candidates_before = all.size();
    res.candidates = options.prune ? prune_sus(table, all) : all;
    if (res.candidates.empty()) throw ValidationError("explore: no candidate SUs");

    std::vector<ReshuffleModel> reshuffle;
    if (options.reshuffle_energy)
        for (std::size_t n = 0; n < networks.size(); ++n)
            reshuffle.push_back(make_reshuffle_model(networks[n], table.sus, arch,
                                                     res.normalized ? 1.0 / res.l_best[n] : 1.0));

    // Single-SU flexibility areas, for the singleton baseline.
    std::vector<double> single_flex(table.sus.size(), 0.0);
    for (auto s : res.candidates)
        single_flex[s] = overhead_counts(std::span(&table.sus[s], 1), arch).area_flex;

    // Subset classes in evaluation order, truncated at the cap.
    const auto n_cand = res.candidates.size();
    const int k_max = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(options.max_sus), n_cand));
    const int k_min = options.include_smaller_sets ? 1 : k_max;
    constexpr std::uint64_t kChunk = 1024;
    std::vector<detail::Chunk> chunks;
    std::uint64_t budget = options.subset_cap;
    for (int k = k_min; k <= k_max; ++k) {
        const auto count = detail::binomial(n_cand, static_cast<std::uint64_t>(k));
        res.subsets_total = res.subsets_total + count < res.subsets_total
                                ? std::numeric_limits<std::uint64_t>::max()
                                : res.subsets_total + count;
        const auto take = std::min(count, budget);
        if (take < count) res.truncated = true;
        budget -= take;
        res.subsets_evaluated += take;
        for (std::uint64_t r = 0; r < take; r += kChunk)
            chunks.push_back({k, r, std::min(kChunk, take - r)});
    }

    auto area_of = [&](const OverheadReport& o) {
        return options.area_axis == AreaAxis::flex ? o.area_flex : o.area_total;
    };

    auto eval_chunk = [&](const detail::Chunk& ch) {
        std::vector<detail::Candidate> cands;
        auto comb = detail::unrank_combination(ch.first_rank, n_cand, static_cast<std::size_t>(ch.size));
        std::vector<std::size_t> subset(comb.size());
        std::vector<SpatialUnrolling> sus(comb.size());
        for (std::uint64_t i = 0; i < ch.count; ++i) {
            for (std::size_t j = 0; j < comb.size(); ++j) {
                subset[j] = res.candidates[comb[j]];
                sus[j] = table.sus[subset[j]];
            }
            const auto area = area_of(overhead_counts(sus, arch));
            for (auto& fp : suite_front(table, subset, options.epsilon, reshuffle))
                cands.push_back({{fp.cost.latency, fp.cost.energy, area}, fp.cost, ch.size, subset,
                                 std::move(fp.assignment)});
            if (i + 1 < ch.count) detail::next_combination(comb, n_cand);
        }
        return detail::filter_candidates(std::move(cands), options.epsilon);
    };

    std::vector<std::vector<detail::Candidate>> chunk_results(chunks.size());
    unsigned jobs = options.jobs ? options.jobs : std::max(1u, std::thread::hardware_concurrency());
    jobs = static_cast<unsigned>(std::min<std::size_t>(jobs, std::max<std::size_t>(chunks.size(), 1)));
    if (jobs <= 1) {
        for (std::size_t c = 0; c < chunks.size(); ++c) chunk_results[c] = eval_chunk(chunks[c]);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::exception_ptr> errors(jobs);
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < jobs; ++t)
            pool.emplace_back([&, t] {
                try {
                    for (std::size_t c = next++; c < chunks.size(); c = next++)
                        chunk_results[c] = eval_chunk(chunks[c]);
                } catch (...) {
                    errors[t] = std::current_exception();
                }
            });
        for (auto& th : pool) th.join();
        for (auto& e : errors)
            if (e) std::rethrow_exception(e);
    }

    // Deterministic reduction: per size, then across sizes.
    std::map<int, std::vector<detail::Candidate>> per_size;
    for (std::size_t c = 0; c < chunks.size(); ++c) {
        auto& bucket = per_size[chunks[c].size];
        for (auto& cand : chunk_results[c]) bucket.push_back(std::move(cand));
    }
    std::vector<detail::Candidate> merged;
    for (auto& [k, bucket] : per_size) {
        bucket = detail::filter_candidates(std::move(bucket), options.epsilon);
        merged.insert(merged.end(), bucket.begin(), bucket.end());
    }
    merged = detail::filter_candidates(std::move(merged), options.epsilon);

    auto group = [&](const std::vector<detail::Candidate>& cands) {
        std::map<std::vector<std::size_t>, Solution> by_subset;
        for (const auto& c : cands) {
            auto [it, fresh] = by_subset.try_emplace(c.subset);
            auto& sol = it->second;
            if (fresh) {
                sol.su_set = c.subset;
                std::vector<SpatialUnrolling> sus;
                for (auto s : c.subset) sus.push_back(table.sus[s]);
                sol.overhead = overhead_counts(sus, arch);
                double base = std::numeric_limits<double>::infinity();
                for (auto s : c.subset) base = std::min(base, single_flex[s]);
                sol.overhead.area_flex_baseline = base;
                sol.overhead.area_flex_delta = sol.overhead.area_flex - base;
            }
            sol.front.push_back({c.cost, c.obj[2], c.assignment});
        }
        std::vector<Solution> out;
        for (auto& [_, sol] : by_subset) out.push_back(std::move(sol));
        return out;
    };
    res.solutions = group(merged);
    for (const auto& [k, bucket] : per_size) res.by_size[k] = group(bucket);
    return res;
}

/// All front points of a solution list, flattened.
inline std::vector<const SolutionPoint*> all_points(const std::vector<Solution>& sols) {
    std::vector<const SolutionPoint*> out;
    for (const auto& s : sols)
        for (const auto& p : s.front) out.push_back(&p);
    return out;
}

inline double min_edp(const std::vector<Solution>& sols) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto* p : all_points(sols)) best = std::min(best, p->edp());
    return best;
}

/// Latency/energy front over all points of a solution list.
inline std::vector<Objectives<2>> latency_energy_front(const std::vector<Solution>& sols) {
    std::vector<Objectives<2>> pts;
    for (const auto* p : all_points(sols)) pts.push_back({p->cost.latency, p->cost.energy});
    return pareto_filter<2>(pts);
}

} // namespace coac
