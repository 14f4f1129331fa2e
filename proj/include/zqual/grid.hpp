#pragma once

#include <cstddef>
#include <functional>
#include <numeric>
#include <vector>

namespace zqual {

/// Row-major strides for slowest-first dims.
inline std::vector<std::size_t> row_major_strides(const std::vector<std::size_t>& dims) {
    std::vector<std::size_t> s(dims.size(), 1);
    for (std::size_t i = dims.size(); i-- > 1;) s[i - 1] = s[i] * dims[i];
    return s;
}

inline std::size_t product(const std::vector<std::size_t>& dims) {
    return std::accumulate(dims.begin(), dims.end(), std::size_t{1}, std::multiplies<>{});
}

/// Visits every multi-index in the box [lo, lo + extent) in row-major order.
template <class F>
void for_each_index(const std::vector<std::size_t>& lo, const std::vector<std::size_t>& extent, F&& f) {
    const std::size_t rank = extent.size();
    for (auto e : extent)
        if (e == 0) return;
    std::vector<std::size_t> idx = lo;
    while (true) {
        f(static_cast<const std::vector<std::size_t>&>(idx));
        std::size_t ax = rank;
        while (ax-- > 0) {
            if (++idx[ax] < lo[ax] + extent[ax]) break;
            idx[ax] = lo[ax];
            if (ax == 0) return;
        }
        if (rank == 0) return;
    }
}

inline std::size_t flat_index(const std::vector<std::size_t>& idx, const std::vector<std::size_t>& strides) {
    std::size_t off = 0;
    for (std::size_t i = 0; i < idx.size(); ++i) off += idx[i] * strides[i];
    return off;
}

}  // namespace zqual
