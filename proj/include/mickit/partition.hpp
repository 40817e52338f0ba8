#pragma once

// Partitions, grids, equipartitions, and the dynamic program that maximizes
// mutual information over coarsenings of one axis of a master grid.

#include "mickit/info.hpp"
#include "mickit/sample.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace mickit {

/// A partition of the real line by strictly increasing cut positions. A cut
/// at c separates values < c from values >= c, so `bin_of(c)` lies to the
/// right of the cut. Partitions of master grids use integer cell indices as
/// cut positions.
class Partition {
public:
    Partition() = default;
    explicit Partition(std::vector<double> cuts);

    std::size_t parts() const noexcept { return cuts_.size() + 1; }
    std::span<const double> cuts() const noexcept { return cuts_; }
    std::size_t bin_of(double value) const noexcept;

    friend bool operator==(const Partition&, const Partition&) = default;

private:
    std::vector<double> cuts_;
};

/// One partition per axis. A k-by-l grid has k rows (y parts) and l columns
/// (x parts).
struct Grid {
    Partition x;
    Partition y;

    std::size_t rows() const noexcept { return y.parts(); }
    std::size_t cols() const noexcept { return x.parts(); }
};

enum class Axis { rows, cols };

struct Equipartition {
    /// Cuts at midpoints between the separated order statistics.
    Partition partition;
    /// Sorted positions where each bin after the first starts.
    std::vector<std::size_t> starts;
    std::vector<std::size_t> counts;
    /// Set when ties left fewer feasible gaps than requested bins.
    bool coarsened = false;
};

/// Splits a sorted sample into `bins` groups of near-equal size. Cuts fall only
/// between distinct values; each boundary goes to the feasible gap nearest its
/// ideal quantile, the leftmost one on ties.
Equipartition equipartition_counts(std::span<const double> sorted_values, std::size_t bins);

/// Fraction of points in each cell of `grid`.
DiscreteJoint apply_grid(std::span<const Point> points, const Grid& grid);

/// A fine grid together with the axis whose cells may be merged.
struct MasterJoint {
    DiscreteJoint joint;
    Axis free_axis;
};

struct PartitionResult {
    /// Cuts are master cell indices on the free axis.
    Partition partition;
    /// Mutual information in nats of the coarsened joint.
    double information;
};

/// Exact maximizer of mutual information over coarsenings of the free axis
/// into at most `max_parts` parts. Ties go to fewer parts, then to the
/// leftmost final cut.
PartitionResult optimize_partition_dp(const MasterJoint& master, std::size_t max_parts);

/// Exhaustive enumeration with the same tie rules; for testing. Requires at
/// most 20 master cells on the free axis.
PartitionResult brute_force_partition(const MasterJoint& master, std::size_t max_parts);

/// Incremental dynamic program over consecutive cells of one axis.
///
/// Cells carry non-negative weights in each bin of the fixed axis. Each call
/// to `advance` admits one more part; `information(p)` is the best mutual
/// information reachable with at most p parts. Work per part is quadratic in
/// the number of cells.
class PartitionSearch {
public:
    struct Entry {
        std::size_t bin;
        double weight;
    };

    /// `cells[c]` lists the non-zero bin weights of cell c.
    PartitionSearch(std::vector<std::vector<Entry>> cells, std::size_t bins);

    /// Dense row-major weights, `cells` by `bins`.
    static PartitionSearch dense(std::size_t cells, std::size_t bins, std::span<const double> weights);

    std::size_t cells() const noexcept { return cells_.size(); }
    std::size_t parts() const noexcept { return best_.size(); }

    /// Adds one part and returns information(parts()).
    double advance();

    double information(std::size_t parts) const;
    Partition partition(std::size_t parts) const;

private:
    double cost(std::size_t begin, std::size_t end) const;

    std::vector<std::vector<Entry>> cells_;
    std::size_t bins_;
    double total_;
    double fixed_entropy_;
    double tie_tolerance_;
    std::vector<double> cost_table_; // triangular, empty when too large
    std::vector<double> layer_;      // optimal cost of cells [0, t) in exactly parts() parts
    std::vector<std::vector<std::size_t>> argmin_;
    std::vector<double> best_;                // best cost with at most p parts
    std::vector<std::size_t> best_parts_;     // exact part count achieving best_
    std::vector<double> exact_;               // cost with exactly p parts
};

} // namespace mickit
