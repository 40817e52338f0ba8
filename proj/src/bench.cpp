#include "mickit/bench.hpp"

#include "mickit/diagnostics.hpp"
#include "mickit/errors.hpp"
#include "mickit/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <mutex>
#include <random>
#include <string>

namespace mickit {
namespace {

constexpr std::size_t kFinePanels = 200;
constexpr std::size_t kCoarsePanels = 100;
constexpr std::size_t kMaxBisection = 60;
constexpr double kR2Tolerance = 1e-6;

std::uint64_t splitmix64(std::uint64_t x) noexcept
{
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

// 53 random bits scaled to [0, 1).
double uniform01(std::mt19937_64& rng) noexcept
{
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

const XDistribution& cached_law(const FunctionSpec& f, XLaw law)
{
    static std::mutex mutex;
    static std::vector<std::unique_ptr<XDistribution>> laws;
    std::lock_guard lock(mutex);
    for (const auto& d : laws) {
        if (d->function() == f && d->law() == law) {
            return *d;
        }
    }
    laws.push_back(std::make_unique<XDistribution>(f, law));
    return *laws.back();
}

// R^2 of an x-noise model by tensor Gauss-Legendre over X and the x-noise.
RSquared xy_r_squared(const FunctionSpec& f, XLaw law_kind, double a, double b, std::size_t panels)
{
    const auto& law = cached_law(f, law_kind);
    const auto x_nodes = law.nodes(panels);
    double ef = 0.0;
    double eff = 0.0;
    for (auto [t, w] : x_nodes) {
        double v = f(t);
        ef += w * v;
        eff += w * v * v;
    }
    const double var_f = eff - ef * ef;
    if (a == 0.0) {
        return {var_f / (var_f + b * b / 3.0), 0.0};
    }
    // Rule for U[-a, a]: reuse the unit-interval nodes of a uniform law.
    const auto e_nodes = cached_law(FunctionSpec(FunctionKind::linear), XLaw::uniform).nodes(panels);
    double ez = 0.0;
    double ezz = 0.0;
    double ezf = 0.0;
    for (auto [t, w] : x_nodes) {
        const double ft = f(t);
        double sz = 0.0;
        double szz = 0.0;
        for (auto [u, v] : e_nodes) {
            const double z = f(t + a * (2.0 * u - 1.0));
            sz += v * z;
            szz += v * z * z;
        }
        ez += w * sz;
        ezz += w * szz;
        ezf += w * sz * ft;
    }
    const double cov = ezf - ez * ef;
    const double var_z = ezz - ez * ez;
    const double var_y = var_f + b * b / 3.0;
    if (!(var_z > 0.0) || !(var_y > 0.0)) {
        return {0.0, 0.0};
    }
    return {std::clamp(cov * cov / (var_z * var_y), 0.0, 1.0), 0.0};
}

double y_variance(const FunctionSpec& f, ModelKind model)
{
    return x_law(model) == XLaw::uniform ? f.variance_uniform() : cached_law(f, XLaw::graph_uniform).variance();
}

long long x_key(double x)
{
    return std::llround(x * 1e9);
}

void check_alpha(double alpha)
{
    if (!(alpha > 0.0 && alpha < 0.5)) {
        throw PreconditionError("alpha must lie in (0, 1/2), got " + std::to_string(alpha));
    }
}

} // namespace

std::string_view to_string(ModelKind model) noexcept
{
    switch (model) {
    case ModelKind::y_uniform:
        return "Y,U";
    case ModelKind::xy_uniform:
        return "XY,U";
    case ModelKind::y_graph:
        return "Y,G";
    case ModelKind::xy_graph:
        return "XY,G";
    }
    return "?";
}

ModelKind parse_model(std::string_view name)
{
    for (auto m : {ModelKind::y_uniform, ModelKind::xy_uniform, ModelKind::y_graph, ModelKind::xy_graph}) {
        if (name == to_string(m)) {
            return m;
        }
    }
    throw InputError("unrecognized model '" + std::string(name) + "'; expected Y,U XY,U Y,G or XY,G");
}

bool has_x_noise(ModelKind model) noexcept
{
    return model == ModelKind::xy_uniform || model == ModelKind::xy_graph;
}

XLaw x_law(ModelKind model) noexcept
{
    return model == ModelKind::y_uniform || model == ModelKind::xy_uniform ? XLaw::uniform : XLaw::graph_uniform;
}

ModelInstance ModelInstance::at_r2(const FunctionSpec& f, ModelKind model, double target)
{
    if (!(target >= 0.0 && target <= 1.0)) {
        throw PreconditionError("R^2 target must lie in [0, 1]");
    }
    ModelInstance m{f, model, 0.0, 0.0, false, target};
    if (target == 0.0) {
        m.independent = true;
        return m;
    }
    const double noise = noise_for_r2(f, model, target);
    m.b = noise;
    m.a = has_x_noise(model) ? noise : 0.0;
    return m;
}

SampleData sample_instance(const ModelInstance& instance, std::size_t n, std::uint64_t seed)
{
    if (n == 0) {
        throw PreconditionError("sample size must be positive");
    }
    const auto& law = cached_law(instance.function, x_law(instance.model));
    const auto& f = instance.function;
    std::mt19937_64 rng(seed);
    std::vector<Point> points;
    points.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double x = law.quantile(uniform01(rng));
        if (instance.independent) {
            points.push_back({x, 2.0 * uniform01(rng) - 1.0});
            continue;
        }
        double xt = x;
        if (has_x_noise(instance.model)) {
            xt += instance.a * (2.0 * uniform01(rng) - 1.0);
        }
        const double y = f(x) + instance.b * (2.0 * uniform01(rng) - 1.0);
        points.push_back({xt, y});
    }
    return SampleData(std::move(points));
}

RSquared r_squared(const ModelInstance& instance)
{
    if (instance.independent) {
        return {0.0, 0.0};
    }
    const auto& f = instance.function;
    const double var_f = y_variance(f, instance.model);
    if (!(var_f > 0.0)) {
        warn("constant function: R^2 is defined as 0");
        return {0.0, 0.0};
    }
    if (!has_x_noise(instance.model) || instance.a == 0.0) {
        return {var_f / (var_f + instance.b * instance.b / 3.0), 0.0};
    }
    auto fine = xy_r_squared(f, x_law(instance.model), instance.a, instance.b, kFinePanels);
    auto coarse = xy_r_squared(f, x_law(instance.model), instance.a, instance.b, kCoarsePanels);
    return {fine.value, std::abs(fine.value - coarse.value)};
}

double noise_for_r2(const FunctionSpec& f, ModelKind model, double target)
{
    if (!(target > 0.0 && target <= 1.0)) {
        throw PreconditionError("R^2 target must lie in (0, 1], got " + std::to_string(target));
    }
    if (target == 1.0) {
        return 0.0;
    }
    const double var_f = y_variance(f, model);
    if (!has_x_noise(model)) {
        return std::sqrt(3.0 * var_f * (1.0 - target) / target);
    }
    auto r2 = [&](double sigma) { return xy_r_squared(f, x_law(model), sigma, sigma, kFinePanels).value; };
    double lo = 0.0;
    double hi = 0.1;
    while (r2(hi) > target) {
        lo = hi;
        hi *= 2.0;
        if (hi > 1e6) {
            throw NumericError("could not bracket the noise level for R^2 = " + std::to_string(target));
        }
    }
    for (std::size_t it = 0; it < kMaxBisection; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double v = r2(mid);
        if (std::abs(v - target) < kR2Tolerance) {
            return mid;
        }
        if (v > target) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> coords) noexcept
{
    std::uint64_t s = splitmix64(seed);
    for (std::uint64_t c : coords) {
        s = splitmix64(s ^ splitmix64(c));
    }
    return s;
}

Statistic make_statistic(std::string_view name, const BPolicy& policy, const PrecisionParams& params)
{
    if (name == "mic_e") {
        return {"mic_e", [policy](const SampleData& d, const ModelInstance&) { return mic_e(d, policy).value; }};
    }
    if (name == "mic_approx") {
        return {"mic_approx",
                [policy](const SampleData& d, const ModelInstance&) { return mic_approx(d, policy).value; }};
    }
    if (name == "mic_d") {
        return {"mic_d", [params](const SampleData& d, const ModelInstance&) { return mic_d(d, params).value; }};
    }
    throw InputError("unrecognized statistic '" + std::string(name) + "'; expected mic_e, mic_approx or mic_d");
}

Statistic phi_oracle()
{
    return {"phi", [](const SampleData&, const ModelInstance& m) { return m.phi; }};
}

Statistic constant_statistic(double value)
{
    return {"constant", [value](const SampleData&, const ModelInstance&) { return value; }};
}

double quantile_type7(const std::vector<double>& sorted, double p)
{
    if (sorted.empty()) {
        throw PreconditionError("quantile of an empty sample");
    }
    const double h = (static_cast<double>(sorted.size()) - 1.0) * std::clamp(p, 0.0, 1.0);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    if (lo + 1 >= sorted.size()) {
        return sorted.back();
    }
    return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[lo + 1] - sorted[lo]);
}

std::vector<double> phi_grid(double h)
{
    if (!(h > 0.0 && h <= 1.0)) {
        throw PreconditionError("grid step must lie in (0, 1]");
    }
    const long long count = std::llround(1.0 / h);
    if (std::abs(static_cast<double>(count) * h - 1.0) > 1e-9) {
        throw PreconditionError("grid step must divide 1");
    }
    std::vector<double> xs;
    for (long long i = 0; i <= count; ++i) {
        xs.push_back(static_cast<double>(i) / static_cast<double>(count));
    }
    return xs;
}

Bench::Bench(Statistic statistic, BenchConfig config) : statistic_{std::move(statistic)}, config_{std::move(config)}
{
    if (config_.functions.empty()) {
        throw PreconditionError("benchmark needs at least one function");
    }
    if (config_.models.empty()) {
        throw PreconditionError("benchmark needs at least one model");
    }
    if (config_.trials == 0 || config_.n == 0) {
        throw PreconditionError("benchmark needs positive n and trials");
    }
}

Bench::Entry& Bench::entry(double x)
{
    const long long key = x_key(x);
    auto it = cache_.find(key);
    if (it != cache_.end()) {
        return it->second;
    }
    Entry e;
    for (const auto& f : config_.functions) {
        for (auto m : config_.models) {
            e.instances.push_back(ModelInstance::at_r2(f, m, x));
        }
    }
    return cache_.emplace(key, std::move(e)).first->second;
}

const std::vector<ModelInstance>& Bench::instances(double x)
{
    return entry(x).instances;
}

const std::vector<std::vector<double>>& Bench::distributions(double x)
{
    Entry& e = entry(x);
    if (e.sampled) {
        return e.values;
    }
    const std::size_t trials = config_.trials;
    const std::size_t models = config_.models.size();
    const auto key = static_cast<std::uint64_t>(x_key(x));
    e.values.assign(e.instances.size(), std::vector<double>(trials));
    parallel_for(e.instances.size() * trials, [&](std::size_t job) {
        const std::size_t i = job / trials;
        const std::size_t t = job % trials;
        const std::uint64_t seed = derive_seed(config_.seed, {key, i / models, i % models, t});
        auto sample = sample_instance(e.instances[i], config_.n, seed);
        e.values[i][t] = statistic_.evaluate(sample, e.instances[i]);
    });
    for (auto& v : e.values) {
        std::sort(v.begin(), v.end());
    }
    e.sampled = true;
    return e.values;
}

IntervalEstimate Bench::reliable_interval(double x, double alpha)
{
    check_alpha(alpha);
    const auto& dists = distributions(x);
    IntervalEstimate r;
    r.alpha = alpha;
    r.n = config_.n;
    r.trials = config_.trials;
    r.seed = config_.seed;
    r.lo = std::numeric_limits<double>::infinity();
    r.hi = -std::numeric_limits<double>::infinity();
    for (const auto& v : dists) {
        r.lo = std::min(r.lo, quantile_type7(v, alpha));
        r.hi = std::max(r.hi, quantile_type7(v, 1.0 - alpha));
    }
    return r;
}

IntervalEstimate Bench::interpretable_interval(double y, double alpha, double h)
{
    check_alpha(alpha);
    if (!(h > 0.0 && h <= 0.05 + 1e-12)) {
        throw PreconditionError("interpretable interval grid step must lie in (0, 0.05]");
    }
    IntervalEstimate r;
    r.alpha = alpha;
    r.n = config_.n;
    r.trials = config_.trials;
    r.seed = config_.seed;
    r.resolution = h;
    r.empty = true;
    for (double x : phi_grid(h)) {
        auto reliable = reliable_interval(x, alpha);
        if (y >= reliable.lo && y <= reliable.hi) {
            if (r.empty) {
                r.lo = x;
                r.empty = false;
            }
            r.hi = x;
        }
    }
    if (r.empty) {
        r.lo = r.hi = 0.0;
    }
    return r;
}

PowerCurve Bench::power_function(double x0, const std::vector<double>& xs, double alpha)
{
    check_alpha(alpha);
    PowerCurve curve;
    curve.x0 = x0;
    curve.alpha = alpha;
    curve.xs = xs;
    curve.critical_value = reliable_interval(x0, alpha).hi;
    for (double x : xs) {
        double worst = 1.0;
        for (const auto& v : distributions(x)) {
            auto first = std::lower_bound(v.begin(), v.end(), curve.critical_value);
            double p = static_cast<double>(v.end() - first) / static_cast<double>(v.size());
            worst = std::min(worst, p);
        }
        curve.power.push_back(worst);
        curve.standard_error.push_back(std::sqrt(worst * (1.0 - worst) / static_cast<double>(config_.trials)));
    }
    return curve;
}

EquitabilityReport Bench::equitability_report(double alpha, double h, double y_step)
{
    EquitabilityReport report;
    report.statistic = statistic_.name;
    report.h = h;
    report.alpha = alpha;
    double reciprocal_sum = 0.0;
    std::size_t non_empty = 0;
    for (double y : phi_grid(y_step)) {
        auto interval = interpretable_interval(y, alpha, h);
        if (!interval.empty) {
            report.worst_case_width = std::max(report.worst_case_width, interval.width());
            reciprocal_sum += 1.0 / std::max(interval.width(), h);
            ++non_empty;
        }
        report.rows.push_back({y, interval});
    }
    report.average_case = non_empty > 0 ? reciprocal_sum / static_cast<double>(non_empty) : 0.0;
    return report;
}

UncertainSet uncertain_set(const PowerCurve& curve)
{
    UncertainSet s{0.0, curve.x0, curve.x0};
    for (std::size_t i = 0; i < curve.xs.size(); ++i) {
        if (curve.xs[i] >= curve.x0 - 1e-12 && curve.power[i] < 1.0 - curve.alpha) {
            s.hi = std::max(s.hi, curve.xs[i]);
        }
    }
    s.diameter = s.hi - s.lo;
    return s;
}

IntervalEstimate reliable_interval(const Statistic& stat, double x, double alpha, const BenchConfig& config)
{
    return Bench(stat, config).reliable_interval(x, alpha);
}

IntervalEstimate interpretable_interval(const Statistic& stat, double y, double alpha, const BenchConfig& config,
                                        double h)
{
    return Bench(stat, config).interpretable_interval(y, alpha, h);
}

PowerCurve power_function(const Statistic& stat, double x0, const std::vector<double>& xs, double alpha,
                          const BenchConfig& config)
{
    return Bench(stat, config).power_function(x0, xs, alpha);
}

EquitabilityReport equitability_report(const Statistic& stat, const BenchConfig& config, double alpha, double h,
                                       double y_step)
{
    return Bench(stat, config).equitability_report(alpha, h, y_step);
}

} // namespace mickit
