#pragma once

// The fixed library of test relationships and the laws of X used with them.

#include <functional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace mickit {

enum class FunctionKind { linear, quadratic, cubic, exponential, sinusoidal, piecewise_linear };

/// A library function f on [0,1]. The formulas extend to the whole line, which
/// is how f is evaluated when X is perturbed outside the unit interval.
///
///   linear            x
///   quadratic         4 (x - 1/2)^2
///   cubic             (2x - 1)^3
///   exponential       exp(3x)
///   sinusoidal        sin(2 pi nu x), 0 < nu <= 6
///   piecewise_linear  1 - |2x - 1|
class FunctionSpec {
public:
    explicit FunctionSpec(FunctionKind kind, double frequency = 1.0);

    /// Accepts a library name, optionally "sinusoidal:<nu>".
    static FunctionSpec parse(std::string_view name);
    /// Every library function, with sinusoidal at the given frequencies.
    static std::vector<FunctionSpec> library(const std::vector<double>& frequencies = {1.0});

    FunctionKind kind() const noexcept { return kind_; }
    double frequency() const noexcept { return frequency_; }
    std::string name() const;

    double operator()(double x) const noexcept;
    double derivative(double x) const noexcept;

    /// Points in (0,1) between which f is monotone and smooth.
    const std::vector<double>& breakpoints() const noexcept { return breakpoints_; }
    /// Minimum and maximum of f over [0,1].
    std::pair<double, double> range() const noexcept { return range_; }

    /// Mean and variance of f(X) for X uniform on [0,1], in closed form.
    double mean_uniform() const noexcept;
    double variance_uniform() const noexcept;

    friend bool operator==(const FunctionSpec& a, const FunctionSpec& b) noexcept
    {
        return a.kind_ == b.kind_ && a.frequency_ == b.frequency_;
    }

private:
    FunctionKind kind_;
    double frequency_;
    std::vector<double> breakpoints_;
    std::pair<double, double> range_;
};

/// Solves f(t) = value on [lo, hi], where f is monotone, by bisection. Returns
/// nothing when the value is outside f([lo, hi]).
std::vector<double> solve_on_piece(const FunctionSpec& f, double lo, double hi, double value);

enum class XLaw { uniform, graph_uniform };

std::string_view to_string(XLaw law) noexcept;
XLaw parse_x_law(std::string_view name);

/// Law of X on [0,1]: uniform, or with density proportional to the arc length
/// element sqrt(1 + f'(x)^2) so that points spread evenly along the graph.
class XDistribution {
public:
    XDistribution(FunctionSpec f, XLaw law);

    XLaw law() const noexcept { return law_; }
    const FunctionSpec& function() const noexcept { return f_; }

    double pdf(double t) const noexcept;
    double cdf(double t) const noexcept;
    double quantile(double u) const;

    /// Integral of g(t) pdf(t) over [0,1] by composite Gauss-Legendre with
    /// `panels` panels, split at the breakpoints of f.
    double expect(const std::function<double(double)>& g, std::size_t panels = 512) const;

    /// Nodes and weights (density included) of the rule used by `expect`.
    std::vector<std::pair<double, double>> nodes(std::size_t panels) const;

    /// Mean and variance of f(X).
    double mean() const;
    double variance() const;

private:
    FunctionSpec f_;
    XLaw law_;
    double length_ = 1.0;
    std::vector<double> knots_;
    std::vector<double> cumulative_; // arc length at knots_, graph-uniform only
};

} // namespace mickit
