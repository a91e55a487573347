#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "mpsh/errors.hpp"

namespace mpsh {

/// A strictly increasing multi-index J = (j_1 < ... < j_m), zero-based.
using MultiIndex = std::vector<int>;

inline std::uint64_t binomial(int n, int k) {
    if (k < 0 || k > n) return 0;
    if (k > n - k) k = n - k;
    std::uint64_t r = 1;
    for (int i = 1; i <= k; ++i) r = r * static_cast<std::uint64_t>(n - k + i) / static_cast<std::uint64_t>(i);
    return r;
}

/// All k-subsets of {0,...,n-1} in lexicographic order.
inline std::vector<MultiIndex> subsets(int n, int k) {
    require(n >= 0 && k >= 0 && k <= n, "subsets: need 0 <= k <= n");
    std::vector<MultiIndex> out;
    out.reserve(binomial(n, k));
    MultiIndex cur(k);
    for (int i = 0; i < k; ++i) cur[i] = i;
    while (true) {
        out.push_back(cur);
        int i = k - 1;
        while (i >= 0 && cur[i] == n - k + i) --i;
        if (i < 0) break;
        ++cur[i];
        for (int j = i + 1; j < k; ++j) cur[j] = cur[j - 1] + 1;
    }
    return out;
}

/// Position of a multi-index in the lexicographic enumeration of subsets(n, |J|).
inline std::size_t subset_rank(const MultiIndex& J, int n) {
    const int k = static_cast<int>(J.size());
    std::size_t rank = 0;
    int prev = -1;
    for (int i = 0; i < k; ++i) {
        for (int v = prev + 1; v < J[i]; ++v) rank += binomial(n - v - 1, k - i - 1);
        prev = J[i];
    }
    return rank;
}

inline MultiIndex complement(const MultiIndex& J, int n) {
    MultiIndex out;
    std::size_t p = 0;
    for (int v = 0; v < n; ++v) {
        if (p < J.size() && J[p] == v) {
            ++p;
            continue;
        }
        out.push_back(v);
    }
    return out;
}

} // namespace mpsh
