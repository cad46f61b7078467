#pragma once

#include <algorithm>
#include <cstdint>
#include <iterator>
#include <numeric>
#include <span>
#include <vector>

namespace tabtax {

using RowId = std::uint32_t;

/// Sorted, duplicate-free list of row ids. All helpers below assume and
/// preserve that ordering.
using RowSet = std::vector<RowId>;

inline RowSet all_rows(std::size_t n) {
    RowSet rows(n);
    std::iota(rows.begin(), rows.end(), RowId{0});
    return rows;
}

inline RowSet set_union(std::span<const RowId> a, std::span<const RowId> b) {
    RowSet out;
    out.reserve(a.size() + b.size());
    std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

inline RowSet set_intersection(std::span<const RowId> a, std::span<const RowId> b) {
    RowSet out;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

inline RowSet set_difference(std::span<const RowId> a, std::span<const RowId> b) {
    RowSet out;
    std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

inline bool is_subset(std::span<const RowId> sub, std::span<const RowId> super) {
    return sub.size() <= super.size() && std::includes(super.begin(), super.end(), sub.begin(), sub.end());
}

inline bool intersects(std::span<const RowId> a, std::span<const RowId> b) {
    auto i = a.begin();
    auto j = b.begin();
    while (i != a.end() && j != b.end()) {
        if (*i < *j) {
            ++i;
        } else if (*j < *i) {
            ++j;
        } else {
            return true;
        }
    }
    return false;
}

inline bool contains(std::span<const RowId> set, RowId row) {
    return std::binary_search(set.begin(), set.end(), row);
}

}  // namespace tabtax
