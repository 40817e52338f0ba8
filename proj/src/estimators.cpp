#include "mickit/estimators.hpp"

#include "mickit/diagnostics.hpp"
#include "mickit/errors.hpp"
#include "mickit/partition.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

namespace mickit {
namespace {

constexpr double kEntryTieTolerance = 1e-12;
constexpr std::size_t kMinSample = 4;
constexpr std::size_t kMaxBruteSample = 12;

struct AxisOrder {
    std::vector<std::size_t> order; // point indices by increasing coordinate
    std::vector<double> sorted;
    bool constant = false;
};

AxisOrder order_axis(const SampleData& sample, bool x_axis)
{
    const std::size_t n = sample.size();
    AxisOrder a;
    a.order.resize(n);
    std::iota(a.order.begin(), a.order.end(), std::size_t{0});
    auto coord = [&](std::size_t i) { return x_axis ? sample[i].x : sample[i].y; };
    std::stable_sort(a.order.begin(), a.order.end(), [&](std::size_t l, std::size_t r) { return coord(l) < coord(r); });
    a.sorted.reserve(n);
    for (std::size_t i : a.order) {
        a.sorted.push_back(coord(i));
    }
    a.constant = n == 0 || a.sorted.front() == a.sorted.back();
    return a;
}

struct Ranked {
    AxisOrder x;
    AxisOrder y;
    std::size_t n;
};

Ranked rank(const SampleData& sample)
{
    return {order_axis(sample, true), order_axis(sample, false), sample.size()};
}

using Histogram = std::vector<PartitionSearch::Entry>; // sorted by bin, counts as weights

bool proportional(const Histogram& a, const Histogram& b)
{
    if (a.size() != b.size()) {
        return false;
    }
    double wa = 0.0;
    double wb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i].bin != b[i].bin) {
            return false;
        }
        wa += a[i].weight;
        wb += b[i].weight;
    }
    // Counts are small integers, so the cross products are exact.
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i].weight * wb != b[i].weight * wa) {
            return false;
        }
    }
    return true;
}

void accumulate(Histogram& into, const Histogram& from)
{
    Histogram merged;
    merged.reserve(into.size() + from.size());
    std::size_t i = 0;
    std::size_t j = 0;
    while (i < into.size() || j < from.size()) {
        if (j == from.size() || (i < into.size() && into[i].bin < from[j].bin)) {
            merged.push_back(into[i++]);
        } else if (i == into.size() || from[j].bin < into[i].bin) {
            merged.push_back(from[j++]);
        } else {
            merged.push_back({into[i].bin, into[i].weight + from[j].weight});
            ++i;
            ++j;
        }
    }
    into = std::move(merged);
}

// Best information (nats) for 1..max_parts parts on the free axis against an
// equipartition of the other axis into `equi_parts` bins.
std::vector<double> optimize_free_axis(const AxisOrder& equi, const AxisOrder& free, std::size_t equi_parts,
                                       std::size_t max_parts, std::size_t clump_factor)
{
    const std::size_t n = equi.order.size();
    auto eq = equipartition_counts(equi.sorted, equi_parts);
    const std::size_t bins = eq.counts.size();
    std::vector<std::size_t> bin(n);
    for (std::size_t r = 0, b = 0, next = 0; r < n; ++r) {
        if (next < eq.starts.size() && r == eq.starts[next]) {
            ++b;
            ++next;
        }
        bin[equi.order[r]] = b;
    }

    // Tie groups on the free axis, merged into clumps with proportional
    // conditional distributions. Merging such neighbours never lowers the optimum.
    std::vector<Histogram> clumps;
    std::vector<std::size_t> clump_end; // end position in free order
    Histogram group;
    for (std::size_t r = 0; r < n;) {
        std::size_t s = r;
        group.clear();
        while (s < n && free.sorted[s] == free.sorted[r]) {
            std::size_t b = bin[free.order[s]];
            auto it = std::lower_bound(group.begin(), group.end(), b,
                                       [](const PartitionSearch::Entry& e, std::size_t v) { return e.bin < v; });
            if (it != group.end() && it->bin == b) {
                it->weight += 1.0;
            } else {
                group.insert(it, {b, 1.0});
            }
            ++s;
        }
        if (!clumps.empty() && proportional(clumps.back(), group)) {
            accumulate(clumps.back(), group);
            clump_end.back() = s;
        } else {
            clumps.push_back(group);
            clump_end.push_back(s);
        }
        r = s;
    }

    if (clump_factor > 0 && clumps.size() > clump_factor * max_parts) {
        // Group clumps into equal-count superclumps.
        std::vector<double> ids(n);
        for (std::size_t c = 0, r = 0; c < clumps.size(); ++c) {
            for (; r < clump_end[c]; ++r) {
                ids[r] = static_cast<double>(c);
            }
        }
        auto groups = equipartition_counts(ids, clump_factor * max_parts);
        std::vector<Histogram> super;
        std::size_t c = 0;
        for (std::size_t g = 0; g <= groups.starts.size(); ++g) {
            std::size_t end = g < groups.starts.size() ? groups.starts[g] : n;
            Histogram h;
            while (c < clumps.size() && clump_end[c] <= end) {
                accumulate(h, clumps[c]);
                ++c;
            }
            super.push_back(std::move(h));
        }
        clumps = std::move(super);
    }

    PartitionSearch search(std::move(clumps), bins);
    std::vector<double> info;
    info.reserve(max_parts);
    for (std::size_t p = 0; p < max_parts; ++p) {
        info.push_back(search.advance());
    }
    return info;
}

void require_sample(const SampleData& sample, const char* what)
{
    if (sample.size() < kMinSample) {
        throw PreconditionError(std::string(what) + " needs at least 4 points, got " + std::to_string(sample.size()));
    }
}

std::size_t effective_budget(const BPolicy& policy, std::size_t n)
{
    return std::min(policy.budget(n), n);
}

// Normalized entries within rounding of 1 are reported as exactly 1.
double clamp_unit(double v)
{
    constexpr double rounding = 1e-12;
    return v > 1.0 - rounding ? 1.0 : std::clamp(v, 0.0, 1.0);
}

// Fills every in-budget entry with zero for data with a constant axis.
bool fill_degenerate(CharMatrix& m, const Ranked& r)
{
    if (!r.x.constant && !r.y.constant) {
        return false;
    }
    warn(std::string("degenerate sample: ") + (r.x.constant ? "x" : "y") + " takes a single value; all scores are 0");
    m.degenerate = true;
    for (std::size_t k = 2; 2 * k <= m.budget; ++k) {
        for (std::size_t l = 2; k * l <= m.budget; ++l) {
            m.entries[{k, l}] = 0.0;
        }
    }
    return true;
}

CharMatrix start_matrix(const SampleData& sample, const BPolicy& policy, CharMatrixKind kind)
{
    CharMatrix m;
    m.kind = kind;
    m.n = sample.size();
    m.budget = effective_budget(policy, sample.size());
    return m;
}

} // namespace

BPolicy::BPolicy(double alpha, std::size_t floor) : alpha_{alpha}, floor_{floor}
{
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw PreconditionError("budget exponent must lie in (0, 1), got " + std::to_string(alpha));
    }
    if (floor < 4) {
        throw PreconditionError("budget floor must be at least 4");
    }
}

std::size_t BPolicy::budget(std::size_t n) const
{
    // Grids with k * l <= n^alpha; the slack keeps exact powers such as
    // 100^0.5 from rounding down.
    double v = std::pow(static_cast<double>(n), alpha_);
    auto c = static_cast<std::size_t>(std::floor(v + 1e-9 * std::max(1.0, v)));
    return std::max(floor_, c);
}

std::optional<double> CharMatrix::at(std::size_t k, std::size_t l) const
{
    auto it = entries.find({k, l});
    if (it == entries.end()) {
        return std::nullopt;
    }
    return it->second;
}

MicResult max_entry(const CharMatrix& matrix)
{
    MicResult r;
    r.budget = matrix.budget;
    r.degenerate = matrix.degenerate;
    bool first = true;
    for (const auto& [key, value] : matrix.entries) {
        auto [k, l] = key;
        bool take = false;
        if (first || value > r.value + kEntryTieTolerance) {
            take = true;
        } else if (value >= r.value - kEntryTieTolerance) {
            std::size_t area = k * l;
            std::size_t best_area = r.argmax_k * r.argmax_l;
            take = area < best_area || (area == best_area && k < r.argmax_k);
        }
        if (take) {
            r.value = first ? value : std::max(r.value, value);
            r.argmax_k = k;
            r.argmax_l = l;
            first = false;
        }
    }
    if (first) {
        throw PreconditionError("characteristic matrix has no entries");
    }
    r.value = matrix.entries.at({r.argmax_k, r.argmax_l});
    return r;
}

double i_star_equi(const SampleData& sample, std::size_t k, std::size_t l, const SearchOptions& options)
{
    if (k < 2 || l < 2) {
        throw PreconditionError("grid dimensions must be at least 2");
    }
    if (k * l > sample.size()) {
        throw PreconditionError("grid with " + std::to_string(k * l) + " cells exceeds sample size " +
                                std::to_string(sample.size()));
    }
    auto r = rank(sample);
    if (r.x.constant || r.y.constant) {
        warn("degenerate sample: an axis takes a single value; information is 0");
        return 0.0;
    }
    double best = 0.0;
    if (l >= k) {
        best = std::max(best, optimize_free_axis(r.x, r.y, l, k, options.clump_factor)[k - 1]);
    }
    if (k >= l) {
        best = std::max(best, optimize_free_axis(r.y, r.x, k, l, options.clump_factor)[l - 1]);
    }
    return best;
}

CharMatrix char_matrix_e(const SampleData& sample, const BPolicy& policy, const SearchOptions& options)
{
    require_sample(sample, "MICe");
    auto m = start_matrix(sample, policy, CharMatrixKind::sample_equi);
    auto r = rank(sample);
    if (fill_degenerate(m, r)) {
        return m;
    }
    for (std::size_t e = 2; 2 * e <= m.budget; ++e) {
        const std::size_t o_max = std::min(e, m.budget / e);
        // Columns equipartitioned into e parts, rows optimized, and the transpose.
        auto rows_free = optimize_free_axis(r.x, r.y, e, o_max, options.clump_factor);
        auto cols_free = optimize_free_axis(r.y, r.x, e, o_max, options.clump_factor);
        for (std::size_t o = 2; o <= o_max; ++o) {
            double norm = std::log(static_cast<double>(o));
            double a = clamp_unit(rows_free[o - 1] / norm);
            double b = clamp_unit(cols_free[o - 1] / norm);
            if (o == e) {
                m.entries[{e, e}] = std::max(a, b);
            } else {
                m.entries[{o, e}] = a;
                m.entries[{e, o}] = b;
            }
        }
    }
    return m;
}

MicResult mic_e(const SampleData& sample, const BPolicy& policy, const SearchOptions& options)
{
    return max_entry(char_matrix_e(sample, policy, options));
}

CharMatrix char_matrix_approx(const SampleData& sample, const BPolicy& policy, const SearchOptions& options)
{
    require_sample(sample, "approximate MIC");
    auto m = start_matrix(sample, policy, CharMatrixKind::sample_approx);
    auto r = rank(sample);
    if (fill_degenerate(m, r)) {
        return m;
    }
    for (std::size_t e = 2; e * e <= m.budget; ++e) {
        const std::size_t o_max = m.budget / e;
        const double norm = std::log(static_cast<double>(e));
        auto rows_free = optimize_free_axis(r.x, r.y, e, o_max, options.clump_factor);
        auto cols_free = optimize_free_axis(r.y, r.x, e, o_max, options.clump_factor);
        for (std::size_t o = e; o <= o_max; ++o) {
            double a = clamp_unit(rows_free[o - 1] / norm);
            double b = clamp_unit(cols_free[o - 1] / norm);
            if (o == e) {
                m.entries[{e, e}] = std::max(a, b);
            } else {
                m.entries[{o, e}] = a;
                m.entries[{e, o}] = b;
            }
        }
    }
    return m;
}

MicResult mic_approx(const SampleData& sample, const BPolicy& policy, const SearchOptions& options)
{
    return max_entry(char_matrix_approx(sample, policy, options));
}

CharMatrix char_matrix_brute(const SampleData& sample, const BPolicy& policy)
{
    require_sample(sample, "exhaustive MIC");
    if (sample.size() > kMaxBruteSample) {
        throw PreconditionError("exhaustive MIC supports at most 12 points, got " + std::to_string(sample.size()));
    }
    auto m = start_matrix(sample, policy, CharMatrixKind::sample_full);
    auto r = rank(sample);
    if (fill_degenerate(m, r)) {
        return m;
    }
    const std::size_t n = sample.size();
    const std::size_t budget = m.budget;

    // Distinct-value index of every point on each axis.
    auto distinct_index = [&](const AxisOrder& a) {
        std::vector<std::size_t> idx(n);
        std::size_t d = 0;
        for (std::size_t s = 0; s < n; ++s) {
            if (s > 0 && a.sorted[s] != a.sorted[s - 1]) {
                ++d;
            }
            idx[a.order[s]] = d;
        }
        return std::pair{idx, d + 1};
    };
    auto [xi, x_distinct] = distinct_index(r.x);
    auto [yi, y_distinct] = distinct_index(r.y);

    // Bin of each distinct value for every subset of gaps.
    auto bin_maps = [](std::size_t distinct) {
        std::vector<std::vector<std::uint8_t>> maps(std::size_t{1} << (distinct - 1));
        for (std::size_t mask = 0; mask < maps.size(); ++mask) {
            auto& map = maps[mask];
            map.resize(distinct);
            std::uint8_t b = 0;
            for (std::size_t d = 0; d < distinct; ++d) {
                if (d > 0 && (mask >> (d - 1)) & 1U) {
                    ++b;
                }
                map[d] = b;
            }
        }
        return maps;
    };
    auto x_maps = bin_maps(x_distinct);
    auto y_maps = bin_maps(y_distinct);

    // best[b][a]: largest information with exactly b rows and a columns.
    std::vector<std::vector<double>> best(budget + 1, std::vector<double>(budget + 1, 0.0));
    std::vector<double> cell(budget * budget);
    std::vector<double> row_count(budget);
    std::vector<double> col_count(budget);
    const double total = static_cast<double>(n);
    for (std::size_t mx = 0; mx < x_maps.size(); ++mx) {
        const std::size_t a = static_cast<std::size_t>(std::popcount(mx)) + 1;
        if (2 * a > budget) {
            continue;
        }
        for (std::size_t my = 0; my < y_maps.size(); ++my) {
            const std::size_t b = static_cast<std::size_t>(std::popcount(my)) + 1;
            if (a * b > budget || b < 2 || a < 2) {
                continue;
            }
            std::fill(cell.begin(), cell.begin() + static_cast<std::ptrdiff_t>(a * b), 0.0);
            std::fill(row_count.begin(), row_count.begin() + static_cast<std::ptrdiff_t>(b), 0.0);
            std::fill(col_count.begin(), col_count.begin() + static_cast<std::ptrdiff_t>(a), 0.0);
            for (std::size_t i = 0; i < n; ++i) {
                std::size_t c = x_maps[mx][xi[i]];
                std::size_t w = y_maps[my][yi[i]];
                cell[w * a + c] += 1.0;
                row_count[w] += 1.0;
                col_count[c] += 1.0;
            }
            double info = 0.0;
            for (std::size_t w = 0; w < b; ++w) {
                for (std::size_t c = 0; c < a; ++c) {
                    double v = cell[w * a + c];
                    if (v > 0.0) {
                        info += v / total * std::log(v * total / (row_count[w] * col_count[c]));
                    }
                }
            }
            best[b][a] = std::max(best[b][a], info);
        }
    }
    for (std::size_t k = 2; 2 * k <= budget; ++k) {
        for (std::size_t l = 2; k * l <= budget; ++l) {
            double v = 0.0;
            for (std::size_t b = 2; b <= k; ++b) {
                for (std::size_t a = 2; a <= l; ++a) {
                    v = std::max(v, best[b][a]);
                }
            }
            m.entries[{k, l}] = clamp_unit(v / std::log(static_cast<double>(std::min(k, l))));
        }
    }
    return m;
}

MicResult mic_brute(const SampleData& sample, const BPolicy& policy)
{
    return max_entry(char_matrix_brute(sample, policy));
}

} // namespace mickit
