#include "minmax/kendall.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include "minmax/errors.hpp"

namespace minmax {

namespace {

// total order with NaN on top
int compare(double x, double y) {
    const bool nx = std::isnan(x);
    const bool ny = std::isnan(y);
    if (nx || ny) return nx == ny ? 0 : (nx ? 1 : -1);
    return x < y ? -1 : (x > y ? 1 : 0);
}

std::int64_t pairs(std::int64_t t) { return t * (t - 1) / 2; }

// Sorts idx[lo, hi) by b and returns the number of swaps (discordant pairs).
std::int64_t merge_count(std::vector<std::size_t>& idx, std::vector<std::size_t>& buf, std::size_t lo, std::size_t hi,
                         std::span<const double> b) {
    if (hi - lo < 2) return 0;
    const std::size_t mid = lo + (hi - lo) / 2;
    std::int64_t swaps = merge_count(idx, buf, lo, mid, b) + merge_count(idx, buf, mid, hi, b);
    std::size_t i = lo, j = mid, k = lo;
    while (i < mid && j < hi) {
        if (compare(b[idx[j]], b[idx[i]]) < 0) {
            swaps += static_cast<std::int64_t>(mid - i);
            buf[k++] = idx[j++];
        } else {
            buf[k++] = idx[i++];
        }
    }
    while (i < mid) buf[k++] = idx[i++];
    while (j < hi) buf[k++] = idx[j++];
    std::copy(buf.begin() + static_cast<std::ptrdiff_t>(lo), buf.begin() + static_cast<std::ptrdiff_t>(hi),
              idx.begin() + static_cast<std::ptrdiff_t>(lo));
    return swaps;
}

} // namespace

double kendall_tau(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw InvalidInput("kendall_tau: length mismatch");
    const std::size_t n = a.size();
    if (n < 2) throw InvalidInput("kendall_tau: need at least two observations");

    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](std::size_t x, std::size_t y) {
        const int ca = compare(a[x], a[y]);
        if (ca != 0) return ca < 0;
        const int cb = compare(b[x], b[y]);
        if (cb != 0) return cb < 0;
        return x < y;
    });

    // ties in a (n1) and joint ties (n3)
    std::int64_t n1 = 0, n3 = 0;
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i + 1;
        while (j < n && compare(a[idx[j]], a[idx[i]]) == 0) ++j;
        n1 += pairs(static_cast<std::int64_t>(j - i));
        for (std::size_t k = i; k < j;) {
            std::size_t l = k + 1;
            while (l < j && compare(b[idx[l]], b[idx[k]]) == 0) ++l;
            n3 += pairs(static_cast<std::int64_t>(l - k));
            k = l;
        }
        i = j;
    }

    std::vector<std::size_t> buf(n);
    const std::int64_t swaps = merge_count(idx, buf, 0, n, b);

    std::int64_t n2 = 0;
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i + 1;
        while (j < n && compare(b[idx[j]], b[idx[i]]) == 0) ++j;
        n2 += pairs(static_cast<std::int64_t>(j - i));
        i = j;
    }

    const std::int64_t n0 = pairs(static_cast<std::int64_t>(n));
    const double denom = std::sqrt(static_cast<double>(n0 - n1) * static_cast<double>(n0 - n2));
    if (denom == 0.0) return 0.0;
    const double numer = static_cast<double>(n0 - n1 - n2 + n3 - 2 * swaps);
    return std::clamp(numer / denom, -1.0, 1.0);
}

} // namespace minmax
