#pragma once

// Discrete entropy and mutual information. All quantities are in nats.

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace mickit {

/// Tolerance used when checking that a mass vector sums to one.
inline constexpr double kMassTolerance = 1e-12;

/// x ln x with the convention 0 ln 0 = 0.
inline double xlogx(double x) noexcept;

/// Probability mass over a rows-by-cols grid of cells, stored row-major.
///
/// Rows index the y-axis and columns the x-axis. Rows or columns may carry
/// zero mass. Construction rejects negative entries and totals that differ
/// from one by more than kMassTolerance; use `normalized` to build a joint
/// from unnormalized weights.
class DiscreteJoint {
public:
    DiscreteJoint(std::size_t rows, std::size_t cols, std::vector<double> mass);

    /// Scales non-negative weights (e.g. counts) so that they sum to one.
    static DiscreteJoint normalized(std::size_t rows, std::size_t cols, std::vector<double> weights);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    double at(std::size_t row, std::size_t col) const noexcept { return mass_[row * cols_ + col]; }
    std::span<const double> mass() const noexcept { return mass_; }
    std::span<const double> row_marginals() const noexcept { return row_marginals_; }
    std::span<const double> col_marginals() const noexcept { return col_marginals_; }

    DiscreteJoint transposed() const;

private:
    std::size_t rows_;
    std::size_t cols_;
    std::vector<double> mass_;
    std::vector<double> row_marginals_;
    std::vector<double> col_marginals_;
};

/// Signed mass changes to apply to a DiscreteJoint of the same shape.
class PerturbationSpec {
public:
    PerturbationSpec(std::size_t rows, std::size_t cols, std::vector<double> deltas);

    /// All-zero perturbation.
    static PerturbationSpec zero(std::size_t rows, std::size_t cols);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::span<const double> deltas() const noexcept { return deltas_; }

    /// Total positive mass added, which equals the mass moved when the
    /// deltas sum to zero.
    double total_moved() const noexcept { return total_moved_; }

private:
    std::size_t rows_;
    std::size_t cols_;
    std::vector<double> deltas_;
    double total_moved_;
};

/// Neumaier-compensated sum.
double stable_sum(std::span<const double> values) noexcept;

/// Entropy of a Bernoulli(p) variable. Throws PreconditionError outside [0,1].
double binary_entropy(double p);

/// Shannon entropy of a probability vector. Throws InputError when the vector
/// has negative entries or does not sum to one.
double entropy(std::span<const double> dist);

double mutual_information(const DiscreteJoint& joint);

/// I(joint) / ln min(rows, cols), clamped to [0, 1] to absorb rounding.
/// Throws PreconditionError when either dimension is below 2.
double normalized_mi(const DiscreteJoint& joint);

/// Linfoot's informational coefficient of correlation, 1 - 2^(-2 I_bits).
double linfoot(const DiscreteJoint& joint);

/// Applies the deltas and renormalizes. Throws PreconditionError when a cell
/// would become negative or the shapes differ.
DiscreteJoint perturb(const DiscreteJoint& joint, const PerturbationSpec& spec);

/// Entropy of already validated, possibly unnormalized weights divided by
/// `total`; skips validation for hot loops.
double entropy_unchecked(std::span<const double> weights, double total) noexcept;

inline double xlogx(double x) noexcept
{
    return x > 0.0 ? x * std::log(x) : 0.0;
}

} // namespace mickit
