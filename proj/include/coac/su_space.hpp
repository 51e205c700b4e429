#pragma once

// Spatial unrollings (SUs): how the PE array distributes the seven loop
// dimensions, their enumeration for a given array size and text form.

#include <algorithm>
#include <cctype>
#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "coac/error.hpp"
#include "coac/loop_dims.hpp"

namespace coac {

/// Unroll factors per loop dimension. The product of all factors is the
/// number of PEs the SU occupies.
struct SpatialUnrolling {
    DimArray factors{1, 1, 1, 1, 1, 1, 1};

    std::int64_t operator[](Dim d) const noexcept { return factors[index_of(d)]; }
    std::int64_t& operator[](Dim d) noexcept { return factors[index_of(d)]; }

    std::int64_t ox() const noexcept { return (*this)[Dim::OX]; }
    std::int64_t oy() const noexcept { return (*this)[Dim::OY]; }
    std::int64_t fx() const noexcept { return (*this)[Dim::FX]; }
    std::int64_t fy() const noexcept { return (*this)[Dim::FY]; }
    std::int64_t g() const noexcept { return (*this)[Dim::G]; }
    std::int64_t c() const noexcept { return (*this)[Dim::C]; }
    std::int64_t k() const noexcept { return (*this)[Dim::K]; }

    std::int64_t pe_count() const noexcept {
        std::int64_t p = 1;
        for (auto f : factors) p *= f;
        return p;
    }

    bool all_powers_of_two() const noexcept {
        return std::all_of(factors.begin(), factors.end(), detail::is_power_of_two);
    }

    /// Lexicographic over (Ox_u, Oy_u, Fx_u, Fy_u, G_u, C_u, K_u).
    friend auto operator<=>(const SpatialUnrolling&, const SpatialUnrolling&) = default;
};

/// Per-SU quantities that drive the overhead model.
struct SuDerived {
    std::int64_t o_sum = 1; ///< partial products accumulated per output per cycle
    std::int64_t w_u = 1;   ///< weight words needed in parallel
    std::int64_t a_u = 1;   ///< activation words needed in parallel

    friend bool operator==(const SuDerived&, const SuDerived&) = default;
};

inline SuDerived su_derived(const SpatialUnrolling& su) noexcept {
    return {
        .o_sum = su.c() * su.fx() * su.fy(),
        .w_u = su.g() * su.c() * su.k() * su.fx() * su.fy(),
        .a_u = su.g() * su.c() * su.ox() * su.fx() * su.oy() * su.fy(),
    };
}

struct SuConstraints {
    std::array<std::optional<std::int64_t>, kNumDims> max_factor{};
    /// Reject SUs with G_u > 1 together with C_u > 1 or K_u > 1.
    bool forbid_mixed_g = true;

    static SuConstraints none() {
        SuConstraints c;
        c.forbid_mixed_g = false;
        return c;
    }

    bool admits(const SpatialUnrolling& su) const noexcept {
        for (std::size_t i = 0; i < kNumDims; ++i)
            if (max_factor[i] && su.factors[i] > *max_factor[i]) return false;
        if (forbid_mixed_g && su.g() > 1 && (su.c() > 1 || su.k() > 1)) return false;
        return true;
    }
};

inline void validate_constraints(const SuConstraints& c) {
    for (std::size_t i = 0; i < kNumDims; ++i)
        if (c.max_factor[i] && !detail::is_power_of_two(*c.max_factor[i]))
            throw ValidationError("max unroll factor for " + std::string(kDimNames[i]) +
                                  " must be a power of 2");
}

namespace detail {

inline int log2_exact(std::int64_t x) noexcept {
    int e = 0;
    while ((std::int64_t{1} << e) < x) ++e;
    return e;
}

inline void enumerate_rec(std::size_t dim, int remaining, SpatialUnrolling& cur,
                          const SuConstraints& constraints, std::vector<SpatialUnrolling>& out) {
    if (dim == kNumDims - 1) {
        cur.factors[dim] = std::int64_t{1} << remaining;
        if (constraints.admits(cur)) out.push_back(cur);
        return;
    }
    for (int e = 0; e <= remaining; ++e) {
        cur.factors[dim] = std::int64_t{1} << e;
        if (constraints.max_factor[dim] && cur.factors[dim] > *constraints.max_factor[dim]) break;
        enumerate_rec(dim + 1, remaining - e, cur, constraints, out);
    }
}

} // namespace detail

/// Every power-of-2 factorization of nb_pes over the seven dimensions that
/// the constraints admit, in ascending lexicographic order.
inline std::vector<SpatialUnrolling> enumerate_sus(std::int64_t nb_pes,
                                                   const SuConstraints& constraints = {}) {
    if (!detail::is_power_of_two(nb_pes))
        throw PreconditionError("nb_PEs must be a power of 2, got " + std::to_string(nb_pes));
    validate_constraints(constraints);
    std::vector<SpatialUnrolling> out;
    SpatialUnrolling cur;
    detail::enumerate_rec(0, detail::log2_exact(nb_pes), cur, constraints, out);
    return out;
}

enum class FactorRule : std::uint8_t { power_of_two, any_positive };

/// Parses `DIM=FACTOR(,DIM=FACTOR)*`. Omitted dimensions are 1; the empty
/// string is the all-ones SU.
inline SpatialUnrolling parse_su(std::string_view text,
                                 FactorRule rule = FactorRule::power_of_two) {
    SpatialUnrolling su;
    std::array<bool, kNumDims> seen{};
    std::string clean;
    for (char ch : text)
        if (!std::isspace(static_cast<unsigned char>(ch)))
            clean.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(ch))));
    if (clean.empty()) return su;

    std::size_t pos = 0;
    while (pos <= clean.size()) {
        const auto comma = std::min(clean.find(',', pos), clean.size());
        const std::string_view item(clean.data() + pos, comma - pos);
        const auto eq = item.find('=');
        if (eq == std::string_view::npos || eq == 0 || eq + 1 == item.size())
            throw ParseError("SU '" + std::string(text) + "': expected DIM=FACTOR, got '" +
                             std::string(item) + "'");
        const auto dim = dim_from_name(item.substr(0, eq));
        if (!dim)
            throw ParseError("SU '" + std::string(text) + "': unknown dimension '" +
                             std::string(item.substr(0, eq)) + "'");
        const auto digits = item.substr(eq + 1);
        if (!std::all_of(digits.begin(), digits.end(),
                         [](char ch) { return std::isdigit(static_cast<unsigned char>(ch)); }) ||
            digits.size() > 12)
            throw ParseError("SU '" + std::string(text) + "': bad factor '" + std::string(digits) +
                             "'");
        const auto value = std::stoll(std::string(digits));
        if (seen[index_of(*dim)])
            throw ParseError("SU '" + std::string(text) + "': duplicate dimension " +
                             std::string(name_of(*dim)));
        seen[index_of(*dim)] = true;
        if (value < 1)
            throw ValidationError("SU '" + std::string(text) + "': factor must be >= 1");
        if (rule == FactorRule::power_of_two && !detail::is_power_of_two(value))
            throw ValidationError("SU '" + std::string(text) + "': factor " + std::to_string(value) +
                                  " for " + std::string(name_of(*dim)) + " is not a power of 2");
        su[*dim] = value;
        pos = comma + 1;
    }
    return su;
}

/// Canonical text form: only factors > 1, in the fixed dimension order.
inline std::string to_string(const SpatialUnrolling& su) {
    std::string out;
    for (auto d : kAllDims) {
        if (su[d] == 1) continue;
        if (!out.empty()) out += ',';
        out += name_of(d);
        out += '=';
        out += std::to_string(su[d]);
    }
    return out;
}

/// Display form that never renders empty.
inline std::string display_name(const SpatialUnrolling& su) {
    auto s = to_string(su);
    return s.empty() ? std::string("[1]") : "[" + s + "]";
}

} // namespace coac
