#include "esgvine/copula.hpp"
#include "esgvine/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace esgvine {

namespace {

// Sorts v by merge sort and returns the number of inversions.
std::uint64_t merge_count(std::vector<double>& v, std::vector<double>& buffer, std::size_t lo, std::size_t hi) {
    if (hi - lo < 2) return 0;
    const std::size_t mid = lo + (hi - lo) / 2;
    std::uint64_t swaps = merge_count(v, buffer, lo, mid) + merge_count(v, buffer, mid, hi);
    std::size_t i = lo, j = mid, k = lo;
    while (i < mid && j < hi) {
        if (v[j] < v[i]) {
            swaps += mid - i;
            buffer[k++] = v[j++];
        } else {
            buffer[k++] = v[i++];
        }
    }
    while (i < mid) buffer[k++] = v[i++];
    while (j < hi) buffer[k++] = v[j++];
    std::copy(buffer.begin() + static_cast<std::ptrdiff_t>(lo), buffer.begin() + static_cast<std::ptrdiff_t>(hi),
              v.begin() + static_cast<std::ptrdiff_t>(lo));
    return swaps;
}

template <class Eq>
std::uint64_t tied_pairs(std::size_t n, Eq&& equal_to_previous) {
    std::uint64_t total = 0;
    std::uint64_t run = 1;
    for (std::size_t i = 1; i < n; ++i) {
        if (equal_to_previous(i)) {
            ++run;
        } else {
            total += run * (run - 1) / 2;
            run = 1;
        }
    }
    return total + run * (run - 1) / 2;
}

}  // namespace

// Knight's algorithm: sort by (x, y), count ties, then count discordant
// pairs as merge-sort inversions of y.
double empirical_tau(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size()) throw DataError("empirical_tau: series differ in length");
    const std::size_t n = x.size();
    if (n < 2) throw DataError("empirical_tau: need at least 2 observations");

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (x[a] != x[b]) return x[a] < x[b];
        return y[a] < y[b];
    });
    std::vector<double> xs(n), ys(n);
    for (std::size_t i = 0; i < n; ++i) {
        xs[i] = x[order[i]];
        ys[i] = y[order[i]];
    }

    const auto n0 = static_cast<std::uint64_t>(n) * (n - 1) / 2;
    const auto ties_x = tied_pairs(n, [&](std::size_t i) { return xs[i] == xs[i - 1]; });
    const auto ties_xy =
        tied_pairs(n, [&](std::size_t i) { return xs[i] == xs[i - 1] && ys[i] == ys[i - 1]; });

    std::vector<double> buffer(n);
    const auto swaps = merge_count(ys, buffer, 0, n);
    const auto ties_y = tied_pairs(n, [&](std::size_t i) { return ys[i] == ys[i - 1]; });

    if (ties_x == n0 || ties_y == n0) throw DataError("empirical_tau: zero-variance input");
    const double numerator = static_cast<double>(n0) - static_cast<double>(ties_x) - static_cast<double>(ties_y) +
                             static_cast<double>(ties_xy) - 2.0 * static_cast<double>(swaps);
    const double denominator =
        std::sqrt(static_cast<double>(n0 - ties_x)) * std::sqrt(static_cast<double>(n0 - ties_y));
    return std::clamp(numerator / denominator, -1.0, 1.0);
}

}  // namespace esgvine
