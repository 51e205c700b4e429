// Explores SU pairs for a conv + depthwise network on an 8-PE array and
// prints the resulting latency/energy/area front.

#include <cstdio>

#include "coac/coac.hpp"

int main() {
    coac::ArchConfig arch;
    arch.nb_pes = 8;
    arch.pw_w_bits = arch.pw_i_bits = arch.pw_o_bits = 32;
    arch.pw_l2_weights_words = arch.pw_l2_act_words = arch.pw_l2_o_words = arch.pw_b_words = 4;

    coac::Network net{"toy", {coac::LayerShape::classical(1, 16, 8, 8, 8, 3, 3),
                              coac::LayerShape::depthwise(2, 16, 8, 8, 3, 3)}};

    coac::ExploreOptions opt;
    opt.max_sus = 2;
    const auto res = coac::explore(arch, {net}, opt);
    std::printf("%zu of %zu SUs survive pruning\n", res.candidates.size(), res.candidates_before);
    for (const auto& sol : res.solutions)
        for (const auto& p : sol.front)
            std::printf("%-28s latency %8.0f  energy %10.0f  area %6.0f\n",
                        coac::su_set_text(res.table, sol.su_set, " + ").c_str(), p.cost.latency,
                        p.cost.energy, p.area);
}
