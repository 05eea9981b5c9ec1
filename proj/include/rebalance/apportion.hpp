#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

namespace rebalance {

// Largest-remainder apportionment of `total` integer slots over real
// quotas. Fractional-part ties go to the lower index.
inline std::vector<std::size_t> apportion(const std::vector<double>& quotas, std::size_t total) {
    std::vector<std::size_t> alloc(quotas.size(), 0);
    if (quotas.empty()) return alloc;
    std::vector<std::pair<double, std::size_t>> remainders;
    std::size_t assigned = 0;
    for (std::size_t i = 0; i < quotas.size(); ++i) {
        double q = std::max(quotas[i], 0.0);
        alloc[i] = static_cast<std::size_t>(std::floor(q));
        assigned += alloc[i];
        remainders.emplace_back(q - std::floor(q), i);
    }
    std::stable_sort(remainders.begin(), remainders.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    for (std::size_t i = 0; assigned < total; ++i) {
        alloc[remainders[i % remainders.size()].second]++;
        ++assigned;
    }
    while (assigned > total) {  // over-allocation from rounded-up quotas
        for (auto it = remainders.rbegin(); it != remainders.rend() && assigned > total; ++it) {
            if (alloc[it->second] > 0) {
                alloc[it->second]--;
                --assigned;
            }
        }
    }
    return alloc;
}

}  // namespace rebalance
