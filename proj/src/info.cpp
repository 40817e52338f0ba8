#include "mickit/info.hpp"

#include "mickit/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace mickit {
namespace {

void check_shape(std::size_t rows, std::size_t cols, std::size_t size)
{
    if (rows == 0 || cols == 0) {
        throw InputError("joint distribution needs at least one row and one column");
    }
    if (rows * cols != size) {
        throw InputError("joint distribution has " + std::to_string(size) + " cells, expected " +
                         std::to_string(rows * cols));
    }
}

} // namespace

double stable_sum(std::span<const double> values) noexcept
{
    double sum = 0.0;
    double compensation = 0.0;
    for (double v : values) {
        double t = sum + v;
        if (std::abs(sum) >= std::abs(v)) {
            compensation += (sum - t) + v;
        } else {
            compensation += (v - t) + sum;
        }
        sum = t;
    }
    return sum + compensation;
}

DiscreteJoint::DiscreteJoint(std::size_t rows, std::size_t cols, std::vector<double> mass)
    : rows_{rows}, cols_{cols}, mass_{std::move(mass)}
{
    check_shape(rows_, cols_, mass_.size());
    for (double m : mass_) {
        if (!(m >= 0.0) || !std::isfinite(m)) {
            throw InputError("joint distribution has a negative or non-finite cell");
        }
    }
    double total = stable_sum(mass_);
    if (std::abs(total - 1.0) > kMassTolerance) {
        throw InputError("joint distribution mass sums to " + std::to_string(total) + ", not 1");
    }
    row_marginals_.assign(rows_, 0.0);
    col_marginals_.assign(cols_, 0.0);
    std::vector<double> scratch(std::max(rows_, cols_));
    for (std::size_t i = 0; i < rows_; ++i) {
        row_marginals_[i] = stable_sum(std::span<const double>(mass_).subspan(i * cols_, cols_));
    }
    for (std::size_t j = 0; j < cols_; ++j) {
        for (std::size_t i = 0; i < rows_; ++i) {
            scratch[i] = mass_[i * cols_ + j];
        }
        col_marginals_[j] = stable_sum(std::span<const double>(scratch).first(rows_));
    }
}

DiscreteJoint DiscreteJoint::normalized(std::size_t rows, std::size_t cols, std::vector<double> weights)
{
    check_shape(rows, cols, weights.size());
    for (double w : weights) {
        if (!(w >= 0.0) || !std::isfinite(w)) {
            throw InputError("weights must be non-negative and finite");
        }
    }
    double total = stable_sum(weights);
    if (!(total > 0.0)) {
        throw InputError("weights sum to zero");
    }
    for (double& w : weights) {
        w /= total;
    }
    // One more pass pins the total to 1 within rounding of a single division.
    double again = stable_sum(weights);
    if (again != 1.0) {
        for (double& w : weights) {
            w /= again;
        }
    }
    return DiscreteJoint(rows, cols, std::move(weights));
}

DiscreteJoint DiscreteJoint::transposed() const
{
    std::vector<double> t(mass_.size());
    for (std::size_t i = 0; i < rows_; ++i) {
        for (std::size_t j = 0; j < cols_; ++j) {
            t[j * rows_ + i] = mass_[i * cols_ + j];
        }
    }
    return DiscreteJoint(cols_, rows_, std::move(t));
}

PerturbationSpec::PerturbationSpec(std::size_t rows, std::size_t cols, std::vector<double> deltas)
    : rows_{rows}, cols_{cols}, deltas_{std::move(deltas)}, total_moved_{0.0}
{
    check_shape(rows_, cols_, deltas_.size());
    std::vector<double> positive;
    positive.reserve(deltas_.size());
    for (double d : deltas_) {
        if (!std::isfinite(d)) {
            throw InputError("perturbation has a non-finite delta");
        }
        if (d > 0.0) {
            positive.push_back(d);
        }
    }
    total_moved_ = stable_sum(positive);
}

PerturbationSpec PerturbationSpec::zero(std::size_t rows, std::size_t cols)
{
    return PerturbationSpec(rows, cols, std::vector<double>(rows * cols, 0.0));
}

double binary_entropy(double p)
{
    if (!(p >= 0.0 && p <= 1.0)) {
        throw PreconditionError("binary entropy is defined on [0,1], got " + std::to_string(p));
    }
    return -xlogx(p) - xlogx(1.0 - p);
}

double entropy(std::span<const double> dist)
{
    for (double p : dist) {
        if (!(p >= 0.0) || !std::isfinite(p)) {
            throw InputError("distribution has a negative or non-finite entry");
        }
    }
    double total = stable_sum(dist);
    if (std::abs(total - 1.0) > kMassTolerance) {
        throw InputError("distribution sums to " + std::to_string(total) + ", not 1");
    }
    double h = 0.0;
    for (double p : dist) {
        h -= xlogx(p);
    }
    return h;
}

double entropy_unchecked(std::span<const double> weights, double total) noexcept
{
    if (!(total > 0.0)) {
        return 0.0;
    }
    double s = 0.0;
    for (double w : weights) {
        s += xlogx(w);
    }
    return std::log(total) - s / total;
}

double mutual_information(const DiscreteJoint& joint)
{
    auto rows = joint.row_marginals();
    auto cols = joint.col_marginals();
    double info = 0.0;
    for (std::size_t i = 0; i < joint.rows(); ++i) {
        for (std::size_t j = 0; j < joint.cols(); ++j) {
            double p = joint.at(i, j);
            if (p > 0.0) {
                info += p * std::log(p / (rows[i] * cols[j]));
            }
        }
    }
    return std::max(info, 0.0);
}

double normalized_mi(const DiscreteJoint& joint)
{
    if (joint.rows() < 2 || joint.cols() < 2) {
        throw PreconditionError("normalized mutual information needs at least 2 rows and 2 columns");
    }
    double norm = std::log(static_cast<double>(std::min(joint.rows(), joint.cols())));
    return std::clamp(mutual_information(joint) / norm, 0.0, 1.0);
}

double linfoot(const DiscreteJoint& joint)
{
    // 2^(-2 I_bits) == e^(-2 I_nats)
    return -std::expm1(-2.0 * mutual_information(joint));
}

DiscreteJoint perturb(const DiscreteJoint& joint, const PerturbationSpec& spec)
{
    if (joint.rows() != spec.rows() || joint.cols() != spec.cols()) {
        throw PreconditionError("perturbation shape does not match the joint distribution");
    }
    auto mass = joint.mass();
    auto deltas = spec.deltas();
    std::vector<double> next(mass.size());
    for (std::size_t c = 0; c < mass.size(); ++c) {
        double v = mass[c] + deltas[c];
        if (v < -kMassTolerance) {
            throw PreconditionError("perturbation makes cell " + std::to_string(c) + " negative");
        }
        next[c] = std::max(v, 0.0);
    }
    return DiscreteJoint::normalized(joint.rows(), joint.cols(), std::move(next));
}

} // namespace mickit
