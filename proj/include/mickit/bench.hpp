#pragma once

// Standard noisy functional relationships, their R^2, and Monte-Carlo
// estimates of reliable intervals, interpretable intervals and power.

#include "mickit/density.hpp"
#include "mickit/estimators.hpp"
#include "mickit/functions.hpp"
#include "mickit/sample.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace mickit {

/// Y: noise on Y only; XY: noise on both coordinates. U: X uniform;
/// G: X spread evenly along the graph of f.
enum class ModelKind { y_uniform, xy_uniform, y_graph, xy_graph };

/// "Y,U", "XY,U", "Y,G" or "XY,G".
std::string_view to_string(ModelKind model) noexcept;
ModelKind parse_model(std::string_view name);
bool has_x_noise(ModelKind model) noexcept;
XLaw x_law(ModelKind model) noexcept;

/// One relationship (X + U[-a,a], f(X) + U[-b,b]). The `independent` flag
/// stands for the limit of unbounded noise, where R^2 = 0: X keeps its law and
/// Y is uniform on [-1,1] independently of X.
struct ModelInstance {
    FunctionSpec function{FunctionKind::linear};
    ModelKind model = ModelKind::y_uniform;
    double a = 0.0;
    double b = 0.0;
    bool independent = false;
    /// R^2 of the instance when it was built for a target, otherwise NaN.
    double phi = 0.0;

    /// The instance whose R^2 equals `target` in [0,1].
    static ModelInstance at_r2(const FunctionSpec& f, ModelKind model, double target);
};

/// n i.i.d. draws; identical for identical seeds.
SampleData sample_instance(const ModelInstance& instance, std::size_t n, std::uint64_t seed);

struct RSquared {
    double value = 0.0;
    /// Zero for closed forms; difference between two quadrature resolutions
    /// when computed numerically.
    double standard_error = 0.0;
};

/// Squared Pearson correlation between f(X + eps_a) and f(X) + eps_b.
RSquared r_squared(const ModelInstance& instance);

/// Noise half-width giving R^2 = target in (0,1]. Models with x-noise use the
/// same half-width on both axes.
double noise_for_r2(const FunctionSpec& f, ModelKind model, double target);

/// Splitmix64 mix of a seed and a list of stream coordinates.
std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> coords) noexcept;

/// A statistic evaluated on a sample drawn from a known instance.
struct Statistic {
    std::string name;
    std::function<double(const SampleData&, const ModelInstance&)> evaluate;
};

/// "mic_e", "mic_approx" or "mic_d".
Statistic make_statistic(std::string_view name, const BPolicy& policy = {}, const PrecisionParams& params = {});
/// Returns the R^2 of the generating instance.
Statistic phi_oracle();
Statistic constant_statistic(double value);

struct BenchConfig {
    std::vector<FunctionSpec> functions;
    std::vector<ModelKind> models{ModelKind::y_uniform};
    std::size_t n = 500;
    std::size_t trials = 500;
    std::uint64_t seed = 0;
};

struct IntervalEstimate {
    double lo = 0.0;
    double hi = 0.0;
    /// Set when no grid point qualified; lo and hi are then meaningless.
    bool empty = false;
    double alpha = 0.05;
    std::size_t n = 0;
    std::size_t trials = 0;
    std::uint64_t seed = 0;
    /// Grid step of the scan for interpretable intervals, 0 otherwise.
    double resolution = 0.0;

    double width() const noexcept { return empty ? 0.0 : hi - lo; }
};

struct PowerCurve {
    double x0 = 0.0;
    double alpha = 0.05;
    double critical_value = 0.0;
    std::vector<double> xs;
    std::vector<double> power;
    /// Binomial standard error of each power estimate.
    std::vector<double> standard_error;
};

struct UncertainSet {
    /// Largest distance from x0 to a grid point with power below 1 - alpha.
    double diameter = 0.0;
    double lo = 0.0;
    double hi = 0.0;
};

struct EquitabilityRow {
    double y = 0.0;
    IntervalEstimate interval;
};

struct EquitabilityReport {
    std::string statistic;
    std::vector<EquitabilityRow> rows;
    /// Largest interpretable-interval width over the y grid.
    double worst_case_width = 0.0;
    /// Mean of 1 / max(width, h) over rows with a non-empty interval.
    double average_case = 0.0;
    double h = 0.05;
    double alpha = 0.05;
};

/// Type-7 quantile of sorted values.
double quantile_type7(const std::vector<double>& sorted, double p);

/// Monte-Carlo harness for one statistic and configuration. Sampling
/// distributions are computed once per R^2 value and reused.
class Bench {
public:
    Bench(Statistic statistic, BenchConfig config);

    const Statistic& statistic() const noexcept { return statistic_; }
    const BenchConfig& config() const noexcept { return config_; }

    /// One instance per (function, model) pair, in configuration order.
    const std::vector<ModelInstance>& instances(double x);
    /// Sorted statistic values per instance.
    const std::vector<std::vector<double>>& distributions(double x);

    IntervalEstimate reliable_interval(double x, double alpha);
    IntervalEstimate interpretable_interval(double y, double alpha, double h);
    PowerCurve power_function(double x0, const std::vector<double>& xs, double alpha);
    EquitabilityReport equitability_report(double alpha, double h, double y_step);

private:
    struct Entry {
        std::vector<ModelInstance> instances;
        std::vector<std::vector<double>> values;
        bool sampled = false;
    };
    Entry& entry(double x);

    Statistic statistic_;
    BenchConfig config_;
    std::map<long long, Entry> cache_;
};

/// The grid {0, h, 2h, ..., 1}; h must divide 1 up to rounding.
std::vector<double> phi_grid(double h);

UncertainSet uncertain_set(const PowerCurve& curve);

IntervalEstimate reliable_interval(const Statistic& stat, double x, double alpha, const BenchConfig& config);
IntervalEstimate interpretable_interval(const Statistic& stat, double y, double alpha, const BenchConfig& config,
                                        double h);
PowerCurve power_function(const Statistic& stat, double x0, const std::vector<double>& xs, double alpha,
                          const BenchConfig& config);
EquitabilityReport equitability_report(const Statistic& stat, const BenchConfig& config, double alpha, double h,
                                       double y_step);

} // namespace mickit
