#pragma once

#include <algorithm>
#include <cstddef>
#include <vector>

namespace sdlps {

/// Integer-valued concurrency map w -> k_tilde(w), tabulated on a workload
/// grid. Queries clamp to the nearest tabulated value outside the grid.
struct IntPolicyTable {
    std::vector<double> w_grid;
    std::vector<int> k;

    int at(double w) const {
        if (w_grid.empty()) return 0;
        if (w <= w_grid.front()) return k.front();
        if (w >= w_grid.back()) return k.back();
        const auto it = std::upper_bound(w_grid.begin(), w_grid.end(), w);
        const std::size_t i = static_cast<std::size_t>(it - w_grid.begin()) - 1;
        return k[i];
    }
};

} // namespace sdlps
