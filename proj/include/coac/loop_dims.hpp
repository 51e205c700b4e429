#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>

namespace coac {

/// The seven convolution loop dimensions, in the canonical order used for
/// SU enumeration, rendering and lexicographic comparison.
enum class Dim : std::uint8_t { OX, OY, FX, FY, G, C, K };

inline constexpr std::size_t kNumDims = 7;

inline constexpr std::array<Dim, kNumDims> kAllDims = {Dim::OX, Dim::OY, Dim::FX, Dim::FY,
                                                       Dim::G,  Dim::C,  Dim::K};

inline constexpr std::array<std::string_view, kNumDims> kDimNames = {"OX", "OY", "FX", "FY",
                                                                     "G",  "C",  "K"};

constexpr std::size_t index_of(Dim d) noexcept { return static_cast<std::size_t>(d); }

constexpr std::string_view name_of(Dim d) noexcept { return kDimNames[index_of(d)]; }

constexpr std::optional<Dim> dim_from_name(std::string_view name) noexcept {
    for (std::size_t i = 0; i < kNumDims; ++i)
        if (kDimNames[i] == name) return kAllDims[i];
    return std::nullopt;
}

using DimArray = std::array<std::int64_t, kNumDims>;

} // namespace coac
