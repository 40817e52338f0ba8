#include "mickit/partition.hpp"

#include "mickit/errors.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>

namespace mickit {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kInformationTieTolerance = 1e-12;
constexpr std::size_t kMaxTabulatedCells = 2048;
constexpr std::size_t kMaxBruteForceCells = 20;

// Row-major weights with the free axis first.
std::vector<double> free_axis_major(const MasterJoint& master)
{
    const auto& joint = master.joint;
    if (master.free_axis == Axis::rows) {
        return {joint.mass().begin(), joint.mass().end()};
    }
    auto t = joint.transposed();
    return {t.mass().begin(), t.mass().end()};
}

std::size_t free_cells(const MasterJoint& master)
{
    return master.free_axis == Axis::rows ? master.joint.rows() : master.joint.cols();
}

std::size_t fixed_bins(const MasterJoint& master)
{
    return master.free_axis == Axis::rows ? master.joint.cols() : master.joint.rows();
}

} // namespace

Partition::Partition(std::vector<double> cuts) : cuts_{std::move(cuts)}
{
    for (std::size_t i = 0; i < cuts_.size(); ++i) {
        if (!std::isfinite(cuts_[i])) {
            throw InputError("partition cut is not finite");
        }
        if (i > 0 && !(cuts_[i - 1] < cuts_[i])) {
            throw InputError("partition cuts must be strictly increasing");
        }
    }
}

std::size_t Partition::bin_of(double value) const noexcept
{
    return static_cast<std::size_t>(std::upper_bound(cuts_.begin(), cuts_.end(), value) - cuts_.begin());
}

Equipartition equipartition_counts(std::span<const double> sorted_values, std::size_t bins)
{
    const std::size_t n = sorted_values.size();
    if (bins == 0 || n < bins) {
        throw PreconditionError("equipartition needs 1 <= bins <= n, got bins=" + std::to_string(bins) +
                                " n=" + std::to_string(n));
    }
    std::vector<std::size_t> gaps;
    for (std::size_t g = 1; g < n; ++g) {
        if (!(sorted_values[g - 1] <= sorted_values[g])) {
            throw InputError("equipartition input is not sorted");
        }
        if (sorted_values[g - 1] < sorted_values[g]) {
            gaps.push_back(g);
        }
    }

    Equipartition result;
    const std::size_t wanted = bins - 1;
    if (gaps.size() < wanted) {
        result.starts = gaps;
        result.coarsened = true;
    } else {
        std::size_t lowest = 0; // first admissible index into gaps
        for (std::size_t j = 1; j <= wanted; ++j) {
            const std::size_t highest = gaps.size() - (wanted - j) - 1;
            // Distance to the ideal quantile j*n/bins, scaled by bins to stay integral.
            auto distance = [&](std::size_t gi) {
                auto scaled = static_cast<std::int64_t>(gaps[gi] * bins);
                auto ideal = static_cast<std::int64_t>(j * n);
                return scaled > ideal ? scaled - ideal : ideal - scaled;
            };
            std::size_t best = lowest;
            for (std::size_t gi = lowest + 1; gi <= highest; ++gi) {
                if (distance(gi) < distance(best)) {
                    best = gi;
                } else if (gaps[gi] * bins > j * n) {
                    break;
                }
            }
            result.starts.push_back(gaps[best]);
            lowest = best + 1;
        }
    }

    std::vector<double> cuts;
    std::size_t previous = 0;
    for (std::size_t start : result.starts) {
        cuts.push_back(0.5 * (sorted_values[start - 1] + sorted_values[start]));
        result.counts.push_back(start - previous);
        previous = start;
    }
    result.counts.push_back(n - previous);
    result.partition = Partition(std::move(cuts));
    return result;
}

DiscreteJoint apply_grid(std::span<const Point> points, const Grid& grid)
{
    if (points.empty()) {
        throw PreconditionError("cannot apply a grid to an empty sample");
    }
    std::vector<double> counts(grid.rows() * grid.cols(), 0.0);
    for (const auto& p : points) {
        counts[grid.y.bin_of(p.y) * grid.cols() + grid.x.bin_of(p.x)] += 1.0;
    }
    return DiscreteJoint::normalized(grid.rows(), grid.cols(), std::move(counts));
}

PartitionSearch::PartitionSearch(std::vector<std::vector<Entry>> cells, std::size_t bins)
    : cells_{std::move(cells)}, bins_{bins}, total_{0.0}, fixed_entropy_{0.0}, tie_tolerance_{0.0}
{
    if (cells_.empty() || bins_ == 0) {
        throw PreconditionError("partition search needs at least one cell and one bin");
    }
    std::vector<double> bin_totals(bins_, 0.0);
    for (const auto& cell : cells_) {
        for (const auto& e : cell) {
            if (e.bin >= bins_ || !(e.weight >= 0.0) || !std::isfinite(e.weight)) {
                throw InputError("partition search cell has an invalid entry");
            }
            bin_totals[e.bin] += e.weight;
        }
    }
    total_ = stable_sum(bin_totals);
    if (!(total_ > 0.0)) {
        throw InputError("partition search has no mass");
    }
    fixed_entropy_ = entropy_unchecked(bin_totals, total_);
    tie_tolerance_ = kInformationTieTolerance * total_;

    const std::size_t m = cells_.size();
    if (m <= kMaxTabulatedCells) {
        cost_table_.assign(m * (m + 1) / 2, 0.0);
        std::vector<double> running(bins_, 0.0);
        for (std::size_t begin = 0; begin < m; ++begin) {
            std::fill(running.begin(), running.end(), 0.0);
            double weight = 0.0;
            double sum_xlogx = 0.0;
            for (std::size_t end = begin + 1; end <= m; ++end) {
                for (const auto& e : cells_[end - 1]) {
                    double& c = running[e.bin];
                    sum_xlogx += xlogx(c + e.weight) - xlogx(c);
                    c += e.weight;
                    weight += e.weight;
                }
                cost_table_[end * (end - 1) / 2 + begin] = xlogx(weight) - sum_xlogx;
            }
        }
    }
}

PartitionSearch PartitionSearch::dense(std::size_t cells, std::size_t bins, std::span<const double> weights)
{
    if (weights.size() != cells * bins) {
        throw InputError("dense partition search weights have the wrong size");
    }
    std::vector<std::vector<Entry>> sparse(cells);
    for (std::size_t c = 0; c < cells; ++c) {
        for (std::size_t b = 0; b < bins; ++b) {
            double w = weights[c * bins + b];
            if (w != 0.0) {
                sparse[c].push_back({b, w});
            }
        }
    }
    return PartitionSearch(std::move(sparse), bins);
}

double PartitionSearch::cost(std::size_t begin, std::size_t end) const
{
    return cost_table_[end * (end - 1) / 2 + begin];
}

double PartitionSearch::advance()
{
    const std::size_t m = cells_.size();
    const std::size_t p = best_.size() + 1; // part count being added
    std::vector<double> next(m + 1, kInf);

    if (p == 1) {
        if (!cost_table_.empty()) {
            for (std::size_t t = 1; t <= m; ++t) {
                next[t] = cost(0, t);
            }
        } else {
            std::vector<double> running(bins_, 0.0);
            double weight = 0.0;
            double sum_xlogx = 0.0;
            for (std::size_t t = 1; t <= m; ++t) {
                for (const auto& e : cells_[t - 1]) {
                    double& c = running[e.bin];
                    sum_xlogx += xlogx(c + e.weight) - xlogx(c);
                    c += e.weight;
                    weight += e.weight;
                }
                next[t] = xlogx(weight) - sum_xlogx;
            }
        }
    } else {
        std::vector<std::size_t> arg(m + 1, 0);
        std::vector<double> running;
        std::vector<std::size_t> touched;
        if (cost_table_.empty()) {
            running.assign(bins_, 0.0);
        }
        for (std::size_t t = p; t <= m; ++t) {
            double best = kInf;
            std::size_t best_s = p - 1;
            if (!cost_table_.empty()) {
                for (std::size_t s = p - 1; s < t; ++s) {
                    double candidate = layer_[s] + cost(s, t);
                    if (candidate < best - tie_tolerance_) {
                        best = candidate;
                        best_s = s;
                    }
                }
            } else {
                // Walk s downwards so the cost of [s, t) grows one cell at a time;
                // `<=` keeps the leftmost s among ties.
                double weight = 0.0;
                double sum_xlogx = 0.0;
                for (std::size_t s = t; s-- > p - 1;) {
                    for (const auto& e : cells_[s]) {
                        double& c = running[e.bin];
                        if (c == 0.0) {
                            touched.push_back(e.bin);
                        }
                        sum_xlogx += xlogx(c + e.weight) - xlogx(c);
                        c += e.weight;
                        weight += e.weight;
                    }
                    double candidate = layer_[s] + (xlogx(weight) - sum_xlogx);
                    if (candidate <= best + tie_tolerance_) {
                        best = std::min(best, candidate);
                        best_s = s;
                    }
                }
                for (std::size_t b : touched) {
                    running[b] = 0.0;
                }
                touched.clear();
            }
            next[t] = best;
            arg[t] = best_s;
        }
        argmin_.push_back(std::move(arg));
    }

    layer_ = std::move(next);
    const double exact = layer_[m];
    exact_.push_back(exact);
    if (p == 1 || exact < best_.back() - tie_tolerance_) {
        best_.push_back(exact);
        best_parts_.push_back(p);
    } else {
        best_.push_back(best_.back());
        best_parts_.push_back(best_parts_.back());
    }
    return information(p);
}

double PartitionSearch::information(std::size_t parts) const
{
    if (parts == 0 || parts > best_.size()) {
        throw PreconditionError("partition search has not explored " + std::to_string(parts) + " parts");
    }
    return std::max(0.0, fixed_entropy_ - best_[parts - 1] / total_);
}

Partition PartitionSearch::partition(std::size_t parts) const
{
    if (parts == 0 || parts > best_.size()) {
        throw PreconditionError("partition search has not explored " + std::to_string(parts) + " parts");
    }
    std::size_t used = best_parts_[parts - 1];
    std::vector<double> cuts;
    std::size_t t = cells_.size();
    for (std::size_t layer = used; layer >= 2; --layer) {
        // argmin_[layer - 2] belongs to the layer with `layer` parts.
        t = argmin_[layer - 2][t];
        cuts.push_back(static_cast<double>(t));
    }
    std::reverse(cuts.begin(), cuts.end());
    return Partition(std::move(cuts));
}

PartitionResult optimize_partition_dp(const MasterJoint& master, std::size_t max_parts)
{
    if (max_parts < 2) {
        throw PreconditionError("partition optimization needs at least 2 parts");
    }
    auto weights = free_axis_major(master);
    auto search = PartitionSearch::dense(free_cells(master), fixed_bins(master), weights);
    for (std::size_t p = 0; p < max_parts; ++p) {
        search.advance();
    }
    return {search.partition(max_parts), search.information(max_parts)};
}

PartitionResult brute_force_partition(const MasterJoint& master, std::size_t max_parts)
{
    if (max_parts < 2) {
        throw PreconditionError("partition enumeration needs at least 2 parts");
    }
    const std::size_t m = free_cells(master);
    const std::size_t q = fixed_bins(master);
    if (m > kMaxBruteForceCells) {
        throw PreconditionError("partition enumeration supports at most 20 cells, got " + std::to_string(m));
    }
    auto weights = free_axis_major(master);

    double best_value = -1.0;
    std::vector<std::size_t> best_cuts;
    const std::uint32_t boundaries = static_cast<std::uint32_t>(m - 1);
    for (std::uint32_t mask = 0; mask < (std::uint32_t{1} << boundaries); ++mask) {
        auto cut_count = static_cast<std::size_t>(std::popcount(mask));
        if (cut_count + 1 > max_parts) {
            continue;
        }
        std::vector<std::size_t> cuts;
        for (std::uint32_t b = 0; b < boundaries; ++b) {
            if (mask & (std::uint32_t{1} << b)) {
                cuts.push_back(b + 1);
            }
        }
        // Merge cells into parts and evaluate the double sum directly.
        std::vector<double> merged((cut_count + 1) * q, 0.0);
        std::size_t part = 0;
        for (std::size_t c = 0; c < m; ++c) {
            if (part < cuts.size() && c == cuts[part]) {
                ++part;
            }
            for (std::size_t j = 0; j < q; ++j) {
                merged[part * q + j] += weights[c * q + j];
            }
        }
        std::vector<double> part_mass(cut_count + 1, 0.0);
        std::vector<double> bin_mass(q, 0.0);
        for (std::size_t i = 0; i <= cut_count; ++i) {
            for (std::size_t j = 0; j < q; ++j) {
                part_mass[i] += merged[i * q + j];
                bin_mass[j] += merged[i * q + j];
            }
        }
        double value = 0.0;
        for (std::size_t i = 0; i <= cut_count; ++i) {
            for (std::size_t j = 0; j < q; ++j) {
                double pij = merged[i * q + j];
                if (pij > 0.0) {
                    value += pij * std::log(pij / (part_mass[i] * bin_mass[j]));
                }
            }
        }
        value = std::max(value, 0.0);

        bool better = false;
        if (value > best_value + kInformationTieTolerance) {
            better = true;
        } else if (value >= best_value - kInformationTieTolerance) {
            if (cuts.size() != best_cuts.size()) {
                better = cuts.size() < best_cuts.size();
            } else {
                better = std::lexicographical_compare(cuts.rbegin(), cuts.rend(), best_cuts.rbegin(),
                                                      best_cuts.rend());
            }
        }
        if (better) {
            best_value = value;
            best_cuts = std::move(cuts);
        }
    }
    return {Partition(std::vector<double>(best_cuts.begin(), best_cuts.end())), best_value};
}

} // namespace mickit
