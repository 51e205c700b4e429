#pragma once

// Non-dominated filtering in 2 or 3 minimized objectives.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <map>
#include <numeric>
#include <span>
#include <vector>

namespace coac {

template <std::size_t D>
using Objectives = std::array<double, D>;

namespace detail {

/// a <= b up to a relative tolerance.
inline bool leq(double a, double b, double eps) noexcept {
    return a <= b + eps * std::max(std::fabs(a), std::fabs(b));
}

} // namespace detail

/// Indices of the non-dominated points, ordered by objectives then by
/// `tie_less`. Among equal points only the first under `tie_less` is kept.
/// `tie_less(i, j)` compares two indices and must be a strict weak order.
template <std::size_t D, class TieLess>
std::vector<std::size_t> pareto_indices(std::span<const Objectives<D>> pts, TieLess tie_less,
                                        double eps = 0.0) {
    static_assert(D == 2 || D == 3, "pareto_indices supports 2 or 3 objectives");
    std::vector<std::size_t> order(pts.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (pts[a] != pts[b]) return pts[a] < pts[b];
        return tie_less(a, b);
    });

    std::vector<std::size_t> kept;
    if constexpr (D == 2) {
        // Sweep in ascending first objective; keep a point iff it improves
        // the best second objective seen so far.
        bool any = false;
        double best = 0.0;
        for (auto i : order) {
            const double y = pts[i][1];
            if (any && detail::leq(best, y, eps)) continue;
            kept.push_back(i);
            best = any ? std::min(best, y) : y;
            any = true;
        }
    } else {
        // Staircase over (obj1, obj2) of kept points: keys ascending,
        // values strictly descending.
        std::map<double, double> stair;
        for (auto i : order) {
            const double y = pts[i][1];
            const double w = pts[i][2];
            const double y_cut = y + eps * std::fabs(y);
            auto it = stair.upper_bound(y_cut);
            bool dominated = false;
            if (it != stair.begin()) {
                const auto& [sy, sw] = *std::prev(it);
                dominated = detail::leq(sw, w, eps) && detail::leq(sy, y, eps);
            }
            if (dominated) continue;
            kept.push_back(i);
            // Drop staircase entries the new point covers.
            auto lo = stair.lower_bound(y);
            while (lo != stair.end() && lo->second >= w) lo = stair.erase(lo);
            auto [pos, inserted] = stair.emplace(y, w);
            if (!inserted) pos->second = std::min(pos->second, w);
        }
    }
    return kept;
}

template <std::size_t D>
std::vector<std::size_t> pareto_indices(std::span<const Objectives<D>> pts, double eps = 0.0) {
    return pareto_indices<D>(pts, [](std::size_t a, std::size_t b) { return a < b; }, eps);
}

/// Filters a list of objective tuples; returns the surviving tuples.
template <std::size_t D>
std::vector<Objectives<D>> pareto_filter(std::span<const Objectives<D>> pts, double eps = 0.0) {
    std::vector<Objectives<D>> out;
    for (auto i : pareto_indices<D>(pts, eps)) out.push_back(pts[i]);
    return out;
}

template <std::size_t D>
std::vector<Objectives<D>> pareto_filter(const std::vector<Objectives<D>>& pts, double eps = 0.0) {
    return pareto_filter<D>(std::span<const Objectives<D>>(pts), eps);
}

/// Dominated area of a 2-D minimization front w.r.t. a reference point.
/// Points outside the reference box contribute nothing.
inline double hypervolume_2d(std::span<const Objectives<2>> pts, Objectives<2> ref) {
    std::vector<Objectives<2>> in;
    for (const auto& p : pts)
        if (p[0] < ref[0] && p[1] < ref[1]) in.push_back(p);
    const auto front = pareto_filter<2>(std::span<const Objectives<2>>(in));
    double hv = 0.0;
    double prev_y = ref[1];
    for (const auto& p : front) { // ascending x, descending y
        hv += (ref[0] - p[0]) * (prev_y - p[1]);
        prev_y = p[1];
    }
    return hv;
}

} // namespace coac
