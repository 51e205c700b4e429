#pragma once

// Reference SU-similarity study on an 8-PE array with 4-word ports, and the
// 6-SU preset of a 256-PE platform. The expected cells are the published
// reference values; check_study() compares them with the overhead model.

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "coac/arch.hpp"
#include "coac/flex_overhead.hpp"
#include "coac/su_space.hpp"

namespace coac {

/// SU1..SU4 of the study.
inline std::array<SpatialUnrolling, 4> study_sus() {
    return {parse_su("C=2,K=2,OX=2"), parse_su("K=2,OX=4"), parse_su("G=8"), parse_su("C=2,OX=4")};
}

inline ArchConfig study_arch() {
    ArchConfig a;
    a.nb_pes = 8;
    a.p_bits = 8;
    a.pw_w_bits = a.pw_i_bits = a.pw_o_bits = 4 * 8;
    a.pw_l2_weights_words = a.pw_l2_act_words = a.pw_l2_o_words = a.pw_b_words = 4;
    return a;
}

/// The 256-PE platform's SU set: C_u = 1..32 with K_u = 256 / C_u.
inline std::vector<SpatialUnrolling> evolver256_sus() {
    std::vector<SpatialUnrolling> out;
    for (std::int64_t c = 1; c <= 32; c *= 2) {
        SpatialUnrolling su;
        su[Dim::C] = c;
        su[Dim::K] = 256 / c;
        out.push_back(su);
    }
    return out;
}

struct StudyRow {
    int i, j; ///< 1-based SU numbers
    // data assignment block
    std::int64_t w_mux1, a_mux1, w_mux2, a_mux2, total;
    // output aggregation
    std::int64_t o_sum_i, o_sum_j, o_mux, n_adders;
    // reshuffling buffer
    std::int64_t r_cl_min, reg_buffer, mux_buffer;
};

inline constexpr std::array<StudyRow, 6> kStudyRows = {{
    {1, 2, 4, 16, 8, 8, 36, 2, 1, 12, 4, 2, 16, 12},
    {1, 3, 0, 8, 8, 12, 28, 2, 1, 12, 4, 2, 16, 12},
    {1, 4, 4, 16, 8, 12, 40, 2, 2, 0, 4, 2, 16, 12},
    {2, 3, 4, 16, 12, 8, 40, 1, 1, 8, 0, 1, 32, 28},
    {2, 4, 4, 24, 0, 8, 36, 1, 2, 12, 4, 4, 0, 0},
    {3, 4, 4, 16, 12, 0, 32, 1, 2, 12, 4, 1, 32, 28},
}};

enum class StudyBlock : std::uint8_t { data_assignment, output_aggregation, reshuffling_buffer };

struct StudyCell {
    std::string pair;   ///< e.g. "SU1+SU2"
    std::string field;
    StudyBlock block;
    std::int64_t expected;
    std::int64_t actual;
    bool pass() const noexcept { return expected == actual; }
};

inline std::vector<StudyCell> check_study() {
    const auto sus = study_sus();
    const auto arch = study_arch();
    std::vector<StudyCell> cells;
    for (const auto& row : kStudyRows) {
        const std::array set{sus[static_cast<std::size_t>(row.i - 1)], sus[static_cast<std::size_t>(row.j - 1)]};
        const auto r = overhead_counts(set, arch);
        const auto pair = "SU" + std::to_string(row.i) + "+SU" + std::to_string(row.j);
        auto add = [&](const char* f, StudyBlock b, std::int64_t e, std::int64_t a) {
            cells.push_back({pair, f, b, e, a});
        };
        using B = StudyBlock;
        add("W_MUX1", B::data_assignment, row.w_mux1, r.w_mux1);
        add("A_MUX1", B::data_assignment, row.a_mux1, r.a_mux1);
        add("W_MUX2", B::data_assignment, row.w_mux2, r.w_mux2);
        add("A_MUX2", B::data_assignment, row.a_mux2, r.a_mux2);
        add("tot", B::data_assignment, row.total, r.w_mux1 + r.a_mux1 + r.w_mux2 + r.a_mux2);
        add("O_sum_i", B::output_aggregation, row.o_sum_i, su_derived(set[0]).o_sum);
        add("O_sum_j", B::output_aggregation, row.o_sum_j, su_derived(set[1]).o_sum);
        add("O_MUX", B::output_aggregation, row.o_mux, r.o_mux);
        add("N_adders", B::output_aggregation, row.n_adders, r.n_adders);
        add("R_cl_min", B::reshuffling_buffer, row.r_cl_min, r.r_cl_min);
        add("REG_buffer", B::reshuffling_buffer, row.reg_buffer, r.reg_buffer);
        add("MUX_buffer", B::reshuffling_buffer, row.mux_buffer, r.mux_buffer);
    }
    return cells;
}

} // namespace coac
