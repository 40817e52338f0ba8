#pragma once

// Independent reference computations shared by the unit and acceptance tests.
// Nothing here calls into the library's information or partition code.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

namespace oracle {

using Matrix = std::vector<std::vector<double>>;

inline double hb(double p)
{
    if (p <= 0.0 || p >= 1.0) {
        return 0.0;
    }
    return -p * std::log(p) - (1.0 - p) * std::log(1.0 - p);
}

inline double entropy(const std::vector<double>& p)
{
    double h = 0.0;
    for (double v : p) {
        if (v > 0.0) {
            h -= v * std::log(v);
        }
    }
    return h;
}

/// Mutual information of a (possibly unnormalized) non-negative matrix.
inline double mi(const Matrix& m)
{
    double total = 0.0;
    std::vector<double> rows(m.size(), 0.0);
    std::vector<double> cols(m.empty() ? 0 : m[0].size(), 0.0);
    for (std::size_t i = 0; i < m.size(); ++i) {
        for (std::size_t j = 0; j < m[i].size(); ++j) {
            rows[i] += m[i][j];
            cols[j] += m[i][j];
            total += m[i][j];
        }
    }
    double s = 0.0;
    for (std::size_t i = 0; i < m.size(); ++i) {
        for (std::size_t j = 0; j < m[i].size(); ++j) {
            double p = m[i][j] / total;
            if (p > 0.0) {
                s += p * std::log(p / ((rows[i] / total) * (cols[j] / total)));
            }
        }
    }
    return s;
}

inline std::vector<double> flatten(const Matrix& m)
{
    std::vector<double> out;
    for (const auto& row : m) {
        out.insert(out.end(), row.begin(), row.end());
    }
    return out;
}

inline Matrix random_matrix(std::mt19937_64& rng, std::size_t rows, std::size_t cols, double zero_prob = 0.0)
{
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Matrix m(rows, std::vector<double>(cols));
    double total = 0.0;
    for (auto& row : m) {
        for (double& v : row) {
            v = u(rng) < zero_prob ? 0.0 : u(rng);
            total += v;
        }
    }
    if (total == 0.0) {
        m[0][0] = total = 1.0;
    }
    for (auto& row : m) {
        for (double& v : row) {
            v /= total;
        }
    }
    return m;
}

/// Merges rows of m by group index.
inline Matrix group_rows(const Matrix& m, const std::vector<std::size_t>& group, std::size_t groups)
{
    Matrix out(groups, std::vector<double>(m[0].size(), 0.0));
    for (std::size_t i = 0; i < m.size(); ++i) {
        for (std::size_t j = 0; j < m[i].size(); ++j) {
            out[group[i]][j] += m[i][j];
        }
    }
    return out;
}

inline Matrix transpose(const Matrix& m)
{
    Matrix t(m[0].size(), std::vector<double>(m.size()));
    for (std::size_t i = 0; i < m.size(); ++i) {
        for (std::size_t j = 0; j < m[i].size(); ++j) {
            t[j][i] = m[i][j];
        }
    }
    return t;
}

/// Group index of each of `cells` consecutive cells for a bitmask of cuts;
/// bit b set means a cut before cell b + 1.
inline std::vector<std::size_t> groups_from_mask(std::size_t cells, std::uint32_t mask, std::size_t& groups)
{
    std::vector<std::size_t> g(cells);
    std::size_t current = 0;
    for (std::size_t c = 0; c < cells; ++c) {
        if (c > 0 && ((mask >> (c - 1)) & 1U)) {
            ++current;
        }
        g[c] = current;
    }
    groups = current + 1;
    return g;
}

/// Best information over groupings of the rows of m into at most k parts, by
/// enumeration of every cut subset.
inline double best_row_grouping(const Matrix& m, std::size_t k)
{
    const std::size_t cells = m.size();
    double best = 0.0;
    for (std::uint32_t mask = 0; mask < (1U << (cells - 1)); ++mask) {
        if (static_cast<std::size_t>(std::popcount(mask)) + 1 > k) {
            continue;
        }
        std::size_t groups = 0;
        auto g = groups_from_mask(cells, mask, groups);
        best = std::max(best, mi(group_rows(m, g, groups)));
    }
    return best;
}

/// Ranks 0..n-1 by value; requires distinct values.
inline std::vector<std::size_t> ranks(const std::vector<double>& v)
{
    std::vector<std::size_t> order(v.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<std::size_t> r(v.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
        r[order[i]] = i;
    }
    return r;
}

/// Quantile of sorted data with linear interpolation between order statistics.
inline double quantile(std::vector<double> v, double p)
{
    std::sort(v.begin(), v.end());
    double h = (static_cast<double>(v.size()) - 1.0) * p;
    auto lo = static_cast<std::size_t>(std::floor(h));
    if (lo + 1 >= v.size()) {
        return v.back();
    }
    return v[lo] + (h - static_cast<double>(lo)) * (v[lo + 1] - v[lo]);
}

inline double median(std::vector<double> v)
{
    return quantile(std::move(v), 0.5);
}

} // namespace oracle
