#pragma once

// Hardware cost of supporting a set of SUs on one PE array. Three blocks are
// counted in primitives (registers, one-input MUXes, two-input adders):
//
//   data assignment block   L1 registers, a MUX stage in front of them
//                           (L2 port word -> register) and a MUX stage
//                           behind them (register -> PE)
//   output aggregation      reconfigurable adder tree plus the MUXes that
//                           pick the tree level holding final outputs
//   reshuffling buffer      double-buffered registers and output MUXes that
//                           regroup activations between layers that run
//                           under different SUs
//
// Every SU in a set must be a power-of-2 factorization of the same array.

#include <algorithm>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "coac/arch.hpp"
#include "coac/error.hpp"
#include "coac/su_space.hpp"

namespace coac {

/// 0 for a single source (a wire), otherwise the number of MUX inputs.
inline std::int64_t z(std::int64_t x) {
    if (x < 1) throw PreconditionError("z(x) requires x >= 1");
    return x == 1 ? 0 : x;
}

struct RegisterBanks {
    std::int64_t a_r = 0; ///< activation words
    std::int64_t w_r = 0; ///< weight words

    friend bool operator==(const RegisterBanks&, const RegisterBanks&) = default;
};

namespace detail {

inline std::int64_t common_pe_count(std::span<const SpatialUnrolling> set) {
    if (set.empty()) throw PreconditionError("SU set must not be empty");
    const auto n = set.front().pe_count();
    for (const auto& su : set) {
        if (!su.all_powers_of_two())
            throw PreconditionError("SU " + display_name(su) + " has a non power-of-2 factor");
        if (su.pe_count() != n)
            throw PreconditionError("SU " + display_name(su) + " covers " +
                                    std::to_string(su.pe_count()) + " PEs, expected " +
                                    std::to_string(n));
    }
    return n;
}

inline void check_set(std::span<const SpatialUnrolling> set, const ArchConfig& arch) {
    const auto n = common_pe_count(set);
    if (n != arch.nb_pes)
        throw PreconditionError("SU set covers " + std::to_string(n) + " PEs but the array has " +
                                std::to_string(arch.nb_pes));
    for (auto [v, f] : {std::pair{arch.pw_l2_weights_words, "pw_l2_weights_words"},
                        {arch.pw_l2_act_words, "pw_l2_act_words"},
                        {arch.pw_l2_o_words, "pw_l2_o_words"},
                        {arch.pw_b_words, "pw_b_words"}})
        if (!is_power_of_two(v))
            throw PreconditionError(std::string(f) + " must be a power of 2");
}

} // namespace detail

inline RegisterBanks l1_registers(std::span<const SpatialUnrolling> set) {
    detail::common_pe_count(set);
    RegisterBanks r;
    for (const auto& su : set) {
        const auto d = su_derived(su);
        r.a_r = std::max(r.a_r, d.a_u);
        r.w_r = std::max(r.w_r, d.w_u);
    }
    return r;
}

/// First MUX stage, weights: register position i needs as many sources as
/// the port holds chunks of the narrowest SU using that position.
inline std::int64_t stage1_weight_muxes(std::span<const SpatialUnrolling> set,
                                        const ArchConfig& arch) {
    detail::check_set(set, arch);
    const auto w_r = l1_registers(set).w_r;
    std::int64_t muxes = 0;
    for (std::int64_t i = 1; i <= w_r; ++i) {
        auto narrowest = std::numeric_limits<std::int64_t>::max();
        for (const auto& su : set) {
            const auto w_u = su_derived(su).w_u;
            if (w_u >= i) narrowest = std::min(narrowest, w_u);
        }
        muxes += z(detail::ceil_div(arch.pw_l2_weights_words, narrowest));
    }
    return muxes;
}

/// First MUX stage, activations: a register may take any port word of the
/// same input channel, so the fan-in follows the fewest channels G_u * C_u.
inline std::int64_t stage1_act_muxes(std::span<const SpatialUnrolling> set,
                                     const ArchConfig& arch) {
    detail::check_set(set, arch);
    const auto a_r = l1_registers(set).a_r;
    std::int64_t muxes = 0;
    for (std::int64_t i = 1; i <= a_r; ++i) {
        auto fewest_channels = std::numeric_limits<std::int64_t>::max();
        for (const auto& su : set)
            if (su_derived(su).a_u >= i) fewest_channels = std::min(fewest_channels, su.g() * su.c());
        muxes += z(detail::ceil_div(arch.pw_l2_act_words, fewest_channels));
    }
    return muxes;
}

/// 1-based activation register feeding PE `pe` (1-based) under `su`. Every
/// K_u consecutive groups of O_sum PEs share one input group of registers.
inline std::int64_t act_source(std::int64_t pe, const SpatialUnrolling& su) {
    if (!su.all_powers_of_two()) throw PreconditionError("act_source requires a power-of-2 SU");
    if (pe < 1 || pe > su.pe_count()) throw PreconditionError("PE index out of range");
    const auto o_sum = su_derived(su).o_sum;
    return pe - (detail::ceil_div(pe, o_sum) - detail::ceil_div(pe, su.k() * o_sum)) * o_sum;
}

/// 1-based weight register feeding PE `pe` under `su`: each block of W_u
/// PEs covers all weights of one output position.
inline std::int64_t weight_source(std::int64_t pe, const SpatialUnrolling& su) {
    if (!su.all_powers_of_two()) throw PreconditionError("weight_source requires a power-of-2 SU");
    if (pe < 1 || pe > su.pe_count()) throw PreconditionError("PE index out of range");
    return (pe - 1) % su_derived(su).w_u + 1;
}

struct Stage2Muxes {
    std::int64_t w_mux2 = 0;
    std::int64_t a_mux2 = 0;

    friend bool operator==(const Stage2Muxes&, const Stage2Muxes&) = default;
};

/// Second MUX stage: per PE, z(number of distinct source registers across
/// the set), for weights and activations separately.
inline Stage2Muxes stage2_muxes(std::span<const SpatialUnrolling> set, const ArchConfig& arch) {
    detail::check_set(set, arch);
    struct Shape {
        std::int64_t o_sum, ko, w_u;
    };
    std::vector<Shape> shapes;
    for (const auto& su : set) {
        const auto d = su_derived(su);
        shapes.push_back({d.o_sum, su.k() * d.o_sum, d.w_u});
    }
    Stage2Muxes out;
    std::vector<std::int64_t> w_src(set.size()), a_src(set.size());
    auto distinct = [](std::vector<std::int64_t>& v) {
        std::sort(v.begin(), v.end());
        return static_cast<std::int64_t>(std::unique(v.begin(), v.end()) - v.begin());
    };
    for (std::int64_t pe = 1; pe <= arch.nb_pes; ++pe) {
        for (std::size_t s = 0; s < shapes.size(); ++s) {
            const auto& sh = shapes[s];
            w_src[s] = (pe - 1) % sh.w_u + 1;
            a_src[s] = pe - (detail::ceil_div(pe, sh.o_sum) - detail::ceil_div(pe, sh.ko)) * sh.o_sum;
        }
        out.w_mux2 += z(distinct(w_src));
        out.a_mux2 += z(distinct(a_src));
    }
    return out;
}

struct AdderTree {
    std::int64_t n_adders = 0;
    std::int64_t o_mux = 0;

    friend bool operator==(const AdderTree&, const AdderTree&) = default;
};

/// The tree is as deep as the largest O_sum; level i (2^i inputs summed)
/// is tapped when some SU has O_sum = 2^i.
inline AdderTree adder_tree(std::span<const SpatialUnrolling> set, const ArchConfig& arch) {
    detail::check_set(set, arch);
    std::set<std::int64_t> tapped_levels; // as O_sum values
    for (const auto& su : set) tapped_levels.insert(su_derived(su).o_sum);
    const auto deepest = *tapped_levels.rbegin();

    AdderTree t;
    t.n_adders = (deepest - 1) * (arch.nb_pes / deepest);
    std::int64_t sources_per_port_word = 0;
    for (auto o_sum : tapped_levels) {
        const auto outputs = arch.nb_pes / o_sum;
        sources_per_port_word += outputs > arch.pw_l2_o_words ? outputs / arch.pw_l2_o_words : 1;
    }
    t.o_mux = arch.pw_l2_o_words * z(sources_per_port_word);
    return t;
}

/// Words produced together under SU `from` that the next layer under SU
/// `to` also consumes together. Not symmetric.
inline std::int64_t reshuffle_cluster(const SpatialUnrolling& from, const SpatialUnrolling& to) noexcept {
    return std::gcd(from.k() * from.g(), to.c() * to.g()) * std::gcd(from.ox(), to.ox()) *
           std::gcd(from.oy(), to.oy());
}

struct ReshuffleBuffer {
    std::int64_t r_cl_min = 0;
    std::int64_t reg_buffer = 0;
    std::int64_t mux_buffer = 0;

    friend bool operator==(const ReshuffleBuffer&, const ReshuffleBuffer&) = default;
};

/// Considers every ordered pair of the set, self-transitions included.
inline ReshuffleBuffer reshuffle_buffer(std::span<const SpatialUnrolling> set, const ArchConfig& arch) {
    detail::check_set(set, arch);
    if (arch.pw_b_after_words != 0 && arch.pw_b_after_words != arch.pw_b_words)
        throw PreconditionError("reshuffling buffer: unequal before/after port widths are not supported");
    const auto pw = arch.pw_b_words;

    ReshuffleBuffer rb;
    rb.r_cl_min = std::numeric_limits<std::int64_t>::max();
    std::set<std::int64_t> granules;
    for (const auto& from : set)
        for (const auto& to : set) {
            const auto r = reshuffle_cluster(from, to);
            rb.r_cl_min = std::min(rb.r_cl_min, r);
            granules.insert(std::min(pw, r));
        }
    if (rb.r_cl_min % pw == 0) {
        rb.reg_buffer = 0;
        rb.mux_buffer = 0;
        return rb;
    }
    rb.reg_buffer = 2 * pw * pw / rb.r_cl_min;
    std::int64_t sources = 0;
    for (auto g : granules) sources += pw / g;
    rb.mux_buffer = pw * z(sources);
    return rb;
}

/// All primitive counts for one SU set plus their area.
struct OverheadReport {
    std::int64_t a_r = 0;
    std::int64_t w_r = 0;
    std::int64_t w_mux1 = 0;
    std::int64_t a_mux1 = 0;
    std::int64_t w_mux2 = 0;
    std::int64_t a_mux2 = 0;
    std::int64_t n_adders = 0;
    std::int64_t o_mux = 0;
    std::int64_t r_cl_min = 0;
    std::int64_t reg_buffer = 0;
    std::int64_t mux_buffer = 0;

    double area_l1_registers = 0; ///< A_r/W_r registers, needed even for one SU
    double area_flex = 0;         ///< all three flexibility blocks
    double area_total = 0;        ///< area_flex + PEs + memories
    double area_flex_baseline = 0; ///< area_flex of the cheapest singleton of the set
    double area_flex_delta = 0;    ///< area_flex - area_flex_baseline

    std::int64_t total_muxes() const noexcept {
        return w_mux1 + a_mux1 + w_mux2 + a_mux2 + o_mux + mux_buffer;
    }

    friend bool operator==(const OverheadReport&, const OverheadReport&) = default;
};

/// Counts and areas without the singleton baseline.
inline OverheadReport overhead_counts(std::span<const SpatialUnrolling> set, const ArchConfig& arch) {
    detail::check_set(set, arch);
    OverheadReport r;
    const auto regs = l1_registers(set);
    r.a_r = regs.a_r;
    r.w_r = regs.w_r;
    r.w_mux1 = stage1_weight_muxes(set, arch);
    r.a_mux1 = stage1_act_muxes(set, arch);
    const auto s2 = stage2_muxes(set, arch);
    r.w_mux2 = s2.w_mux2;
    r.a_mux2 = s2.a_mux2;
    const auto tree = adder_tree(set, arch);
    r.n_adders = tree.n_adders;
    r.o_mux = tree.o_mux;
    const auto rb = reshuffle_buffer(set, arch);
    r.r_cl_min = rb.r_cl_min;
    r.reg_buffer = rb.reg_buffer;
    r.mux_buffer = rb.mux_buffer;

    const auto& a = arch.area;
    const auto p = static_cast<double>(arch.p_bits);
    r.area_l1_registers = a.register_bit * p * static_cast<double>(r.a_r + r.w_r);
    // Buffer words carry layer outputs at 2p bits.
    r.area_flex = r.area_l1_registers +
                  a.register_bit * 2.0 * p * static_cast<double>(r.reg_buffer) +
                  a.mux * static_cast<double>(r.total_muxes()) +
                  a.adder * static_cast<double>(r.n_adders);
    r.area_total = r.area_flex + a.pe * static_cast<double>(arch.nb_pes) +
                   a.memory_bit * static_cast<double>(arch.weight_mem_bits + arch.act_mem_bits);
    return r;
}

inline OverheadReport total_overhead(std::span<const SpatialUnrolling> set, const ArchConfig& arch) {
    auto r = overhead_counts(set, arch);
    double baseline = std::numeric_limits<double>::infinity();
    for (const auto& su : set)
        baseline = std::min(baseline, overhead_counts(std::span(&su, 1), arch).area_flex);
    r.area_flex_baseline = baseline;
    r.area_flex_delta = r.area_flex - baseline;
    return r;
}

inline nlohmann::json overhead_to_json(const OverheadReport& r) {
    return {
        {"A_r", r.a_r},
        {"W_r", r.w_r},
        {"W_MUX1", r.w_mux1},
        {"A_MUX1", r.a_mux1},
        {"W_MUX2", r.w_mux2},
        {"A_MUX2", r.a_mux2},
        {"N_adders", r.n_adders},
        {"O_MUX", r.o_mux},
        {"R_cl_min", r.r_cl_min},
        {"REG_buffer", r.reg_buffer},
        {"MUX_buffer", r.mux_buffer},
        {"area_total", r.area_total},
        {"area_flex", r.area_flex},
        {"area_l1_registers", r.area_l1_registers},
        {"area_flex_baseline", r.area_flex_baseline},
        {"area_flex_delta", r.area_flex_delta},
    };
}

} // namespace coac
