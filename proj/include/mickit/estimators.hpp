#pragma once

// Sample characteristic matrices and the statistics built on them.
//
// Convention: an entry (k, l) refers to grids with k rows (y-axis parts) and
// l columns (x-axis parts). All constructions work on ranks, so every
// statistic here is invariant under strictly increasing maps of either axis.

#include "mickit/sample.hpp"

#include <cstddef>
#include <map>
#include <optional>
#include <utility>

namespace mickit {

/// Grid budget B(n) = max(floor, floor(n^alpha)) with 0 < alpha < 1, so that
/// entries cover exactly the grids with k * l <= n^alpha (and the floor).
class BPolicy {
public:
    BPolicy() = default;
    BPolicy(double alpha, std::size_t floor);

    double alpha() const noexcept { return alpha_; }
    std::size_t floor() const noexcept { return floor_; }
    std::size_t budget(std::size_t n) const;

private:
    double alpha_ = 0.6;
    std::size_t floor_ = 4;
};

/// Tuning of the partition search on the optimized axis.
struct SearchOptions {
    /// When a run of the dynamic program would see more than
    /// clump_factor * (max parts) cells, consecutive clumps are grouped into
    /// that many equal-count superclumps first. Zero searches every rank cell.
    std::size_t clump_factor = 15;
};

enum class CharMatrixKind { sample_full, sample_equi, sample_approx };

struct CharMatrix {
    CharMatrixKind kind = CharMatrixKind::sample_equi;
    std::size_t n = 0;
    /// Effective budget min(B(n), n); entries exist exactly for k*l within it.
    std::size_t budget = 0;
    /// Set when one axis has a single distinct value; all entries are then 0.
    bool degenerate = false;
    std::map<std::pair<std::size_t, std::size_t>, double> entries;

    std::optional<double> at(std::size_t k, std::size_t l) const;
};

struct MicResult {
    double value = 0.0;
    std::size_t argmax_k = 0;
    std::size_t argmax_l = 0;
    std::size_t budget = 0;
    bool degenerate = false;
};

/// Largest entry; ties go to the smallest k*l, then the smallest k.
MicResult max_entry(const CharMatrix& matrix);

/// Maximal mutual information (nats) over k-by-l grids whose axis with more
/// parts is equipartitioned. When k == l both orientations are searched.
double i_star_equi(const SampleData& sample, std::size_t k, std::size_t l, const SearchOptions& options = {});

CharMatrix char_matrix_e(const SampleData& sample, const BPolicy& policy, const SearchOptions& options = {});
MicResult mic_e(const SampleData& sample, const BPolicy& policy, const SearchOptions& options = {});

/// Heuristic variant that equipartitions the axis with fewer parts.
CharMatrix char_matrix_approx(const SampleData& sample, const BPolicy& policy, const SearchOptions& options = {});
MicResult mic_approx(const SampleData& sample, const BPolicy& policy, const SearchOptions& options = {});

/// Exhaustive search over all rank grids; requires n <= 12.
CharMatrix char_matrix_brute(const SampleData& sample, const BPolicy& policy);
MicResult mic_brute(const SampleData& sample, const BPolicy& policy);

} // namespace mickit
