// Overhead of every pair of four SUs on an 8-PE array with 4-word ports.

#include <array>
#include <cstdio>

#include "coac/coac.hpp"

int main() {
    const auto sus = coac::study_sus();
    const auto arch = coac::study_arch();
    std::printf("%-9s %6s %6s %6s %6s %7s %5s %8s %4s %4s %4s %9s\n", "pair", "W_MUX1", "A_MUX1",
                "W_MUX2", "A_MUX2", "N_adder", "O_MUX", "R_cl_min", "REG", "MUXb", "A_r", "area_flex");
    for (std::size_t i = 0; i < sus.size(); ++i)
        for (std::size_t j = i + 1; j < sus.size(); ++j) {
            const std::array set{sus[i], sus[j]};
            const auto r = coac::total_overhead(set, arch);
            std::printf("SU%zu+SU%zu   %6lld %6lld %6lld %6lld %7lld %5lld %8lld %4lld %4lld %4lld %9.0f\n",
                        i + 1, j + 1, static_cast<long long>(r.w_mux1), static_cast<long long>(r.a_mux1),
                        static_cast<long long>(r.w_mux2), static_cast<long long>(r.a_mux2),
                        static_cast<long long>(r.n_adders), static_cast<long long>(r.o_mux),
                        static_cast<long long>(r.r_cl_min), static_cast<long long>(r.reg_buffer),
                        static_cast<long long>(r.mux_buffer), static_cast<long long>(r.a_r), r.area_flex);
        }
}
