#include "mickit/functions.hpp"

#include "mickit/errors.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <string>

namespace mickit {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr std::size_t kArcTableIntervals = 4096;
constexpr int kSolveIterations = 100;

// Five-point Gauss-Legendre rule on [-1, 1].
constexpr std::array<double, 5> kGaussNodes{-0.9061798459386640, -0.5384693101056831, 0.0, 0.5384693101056831,
                                            0.9061798459386640};
constexpr std::array<double, 5> kGaussWeights{0.2369268850561891, 0.4786286704993665, 0.5688888888888889,
                                              0.4786286704993665, 0.2369268850561891};

template <class G>
double gauss(double lo, double hi, const G& g)
{
    const double mid = 0.5 * (lo + hi);
    const double half = 0.5 * (hi - lo);
    double s = 0.0;
    for (std::size_t i = 0; i < kGaussNodes.size(); ++i) {
        s += kGaussWeights[i] * g(mid + half * kGaussNodes[i]);
    }
    return s * half;
}

// Uniform panel edges on [0,1] merged with the breakpoints of f.
std::vector<double> panel_edges(const FunctionSpec& f, std::size_t panels)
{
    std::vector<double> edges;
    edges.reserve(panels + 1 + f.breakpoints().size());
    for (std::size_t i = 0; i <= panels; ++i) {
        edges.push_back(static_cast<double>(i) / static_cast<double>(panels));
    }
    edges.insert(edges.end(), f.breakpoints().begin(), f.breakpoints().end());
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    return edges;
}

} // namespace

FunctionSpec::FunctionSpec(FunctionKind kind, double frequency) : kind_{kind}, frequency_{1.0}
{
    if (kind_ == FunctionKind::sinusoidal) {
        if (!(frequency > 0.0 && frequency <= 6.0)) {
            throw InputError("sinusoidal frequency must lie in (0, 6], got " + std::to_string(frequency));
        }
        frequency_ = frequency;
        for (int m = 0;; ++m) {
            double t = (2.0 * m + 1.0) / (4.0 * frequency_);
            if (t >= 1.0) {
                break;
            }
            breakpoints_.push_back(t);
        }
    } else if (kind_ == FunctionKind::quadratic || kind_ == FunctionKind::piecewise_linear) {
        breakpoints_.push_back(0.5);
    }
    double lo = std::min((*this)(0.0), (*this)(1.0));
    double hi = std::max((*this)(0.0), (*this)(1.0));
    for (double t : breakpoints_) {
        lo = std::min(lo, (*this)(t));
        hi = std::max(hi, (*this)(t));
    }
    range_ = {lo, hi};
}

FunctionSpec FunctionSpec::parse(std::string_view name)
{
    std::string_view base = name;
    double frequency = 1.0;
    if (auto colon = name.find(':'); colon != std::string_view::npos) {
        base = name.substr(0, colon);
        auto text = name.substr(colon + 1);
        auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), frequency);
        if (ec != std::errc{} || ptr != text.data() + text.size() || base != "sinusoidal") {
            throw InputError("unrecognized function '" + std::string(name) + "'");
        }
    }
    if (base == "linear") {
        return FunctionSpec(FunctionKind::linear);
    }
    if (base == "quadratic") {
        return FunctionSpec(FunctionKind::quadratic);
    }
    if (base == "cubic") {
        return FunctionSpec(FunctionKind::cubic);
    }
    if (base == "exponential") {
        return FunctionSpec(FunctionKind::exponential);
    }
    if (base == "sinusoidal") {
        return FunctionSpec(FunctionKind::sinusoidal, frequency);
    }
    if (base == "piecewise_linear") {
        return FunctionSpec(FunctionKind::piecewise_linear);
    }
    throw InputError("unrecognized function '" + std::string(name) + "'");
}

std::vector<FunctionSpec> FunctionSpec::library(const std::vector<double>& frequencies)
{
    std::vector<FunctionSpec> out{FunctionSpec(FunctionKind::linear), FunctionSpec(FunctionKind::quadratic),
                                  FunctionSpec(FunctionKind::cubic), FunctionSpec(FunctionKind::exponential)};
    for (double nu : frequencies) {
        out.emplace_back(FunctionKind::sinusoidal, nu);
    }
    out.emplace_back(FunctionKind::piecewise_linear);
    return out;
}

std::string FunctionSpec::name() const
{
    switch (kind_) {
    case FunctionKind::linear:
        return "linear";
    case FunctionKind::quadratic:
        return "quadratic";
    case FunctionKind::cubic:
        return "cubic";
    case FunctionKind::exponential:
        return "exponential";
    case FunctionKind::sinusoidal: {
        if (frequency_ == 1.0) {
            return "sinusoidal";
        }
        char buf[32];
        std::snprintf(buf, sizeof buf, "sinusoidal:%g", frequency_);
        return buf;
    }
    case FunctionKind::piecewise_linear:
        return "piecewise_linear";
    }
    return "unknown";
}

double FunctionSpec::operator()(double x) const noexcept
{
    switch (kind_) {
    case FunctionKind::linear:
        return x;
    case FunctionKind::quadratic:
        return 4.0 * (x - 0.5) * (x - 0.5);
    case FunctionKind::cubic: {
        double v = 2.0 * x - 1.0;
        return v * v * v;
    }
    case FunctionKind::exponential:
        return std::exp(3.0 * x);
    case FunctionKind::sinusoidal:
        return std::sin(2.0 * kPi * frequency_ * x);
    case FunctionKind::piecewise_linear:
        return 1.0 - std::abs(2.0 * x - 1.0);
    }
    return 0.0;
}

double FunctionSpec::derivative(double x) const noexcept
{
    switch (kind_) {
    case FunctionKind::linear:
        return 1.0;
    case FunctionKind::quadratic:
        return 8.0 * (x - 0.5);
    case FunctionKind::cubic: {
        double v = 2.0 * x - 1.0;
        return 6.0 * v * v;
    }
    case FunctionKind::exponential:
        return 3.0 * std::exp(3.0 * x);
    case FunctionKind::sinusoidal:
        return 2.0 * kPi * frequency_ * std::cos(2.0 * kPi * frequency_ * x);
    case FunctionKind::piecewise_linear:
        return x < 0.5 ? 2.0 : -2.0;
    }
    return 0.0;
}

double FunctionSpec::mean_uniform() const noexcept
{
    switch (kind_) {
    case FunctionKind::linear:
    case FunctionKind::piecewise_linear:
        return 0.5;
    case FunctionKind::quadratic:
        return 1.0 / 3.0;
    case FunctionKind::cubic:
        return 0.0;
    case FunctionKind::exponential:
        return std::expm1(3.0) / 3.0;
    case FunctionKind::sinusoidal: {
        double w = 2.0 * kPi * frequency_;
        return (1.0 - std::cos(w)) / w;
    }
    }
    return 0.0;
}

double FunctionSpec::variance_uniform() const noexcept
{
    switch (kind_) {
    case FunctionKind::linear:
    case FunctionKind::piecewise_linear:
        return 1.0 / 12.0;
    case FunctionKind::quadratic:
        return 4.0 / 45.0;
    case FunctionKind::cubic:
        return 1.0 / 7.0;
    case FunctionKind::exponential: {
        double m = std::expm1(3.0) / 3.0;
        return std::expm1(6.0) / 6.0 - m * m;
    }
    case FunctionKind::sinusoidal: {
        double w = 2.0 * kPi * frequency_;
        double second = 0.5 - std::sin(2.0 * w) / (4.0 * w);
        double m = mean_uniform();
        return second - m * m;
    }
    }
    return 0.0;
}

std::vector<double> solve_on_piece(const FunctionSpec& f, double lo, double hi, double value)
{
    double flo = f(lo);
    double fhi = f(hi);
    if (value < std::min(flo, fhi) || value > std::max(flo, fhi)) {
        return {};
    }
    const bool increasing = fhi >= flo;
    for (int it = 0; it < kSolveIterations && hi - lo > 0.0; ++it) {
        double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) {
            break;
        }
        if ((f(mid) < value) == increasing) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return {0.5 * (lo + hi)};
}

std::string_view to_string(XLaw law) noexcept
{
    return law == XLaw::uniform ? "uniform" : "graph_uniform";
}

XLaw parse_x_law(std::string_view name)
{
    if (name == "uniform") {
        return XLaw::uniform;
    }
    if (name == "graph_uniform") {
        return XLaw::graph_uniform;
    }
    throw InputError("unrecognized x law '" + std::string(name) + "'");
}

XDistribution::XDistribution(FunctionSpec f, XLaw law) : f_{std::move(f)}, law_{law}
{
    if (law_ == XLaw::uniform) {
        return;
    }
    auto knots = panel_edges(f_, kArcTableIntervals);
    cumulative_.assign(knots.size(), 0.0);
    auto element = [this](double t) { return std::hypot(1.0, f_.derivative(t)); };
    for (std::size_t i = 1; i < knots.size(); ++i) {
        cumulative_[i] = cumulative_[i - 1] + gauss(knots[i - 1], knots[i], element);
    }
    length_ = cumulative_.back();
    knots_ = std::move(knots);
}

double XDistribution::pdf(double t) const noexcept
{
    if (t < 0.0 || t > 1.0) {
        return 0.0;
    }
    if (law_ == XLaw::uniform) {
        return 1.0;
    }
    return std::hypot(1.0, f_.derivative(t)) / length_;
}

double XDistribution::cdf(double t) const noexcept
{
    if (t <= 0.0) {
        return 0.0;
    }
    if (t >= 1.0) {
        return 1.0;
    }
    if (law_ == XLaw::uniform) {
        return t;
    }
    auto i = static_cast<std::size_t>(std::upper_bound(knots_.begin(), knots_.end(), t) - knots_.begin()) - 1;
    auto element = [this](double s) { return std::hypot(1.0, f_.derivative(s)); };
    return std::clamp((cumulative_[i] + gauss(knots_[i], t, element)) / length_, 0.0, 1.0);
}

double XDistribution::quantile(double u) const
{
    if (!(u >= 0.0 && u <= 1.0)) {
        throw PreconditionError("quantile level must lie in [0, 1]");
    }
    if (law_ == XLaw::uniform) {
        return u;
    }
    const double target = u * length_;
    auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), target);
    if (it == cumulative_.end()) {
        return 1.0;
    }
    auto i = static_cast<std::size_t>(it - cumulative_.begin()) - 1;
    double lo = knots_[i];
    double hi = knots_[i + 1];
    double t = 0.5 * (lo + hi);
    // Safeguarded Newton; the density is bounded below by 1/length.
    for (int iter = 0; iter < 60; ++iter) {
        double g = cdf(t) - u;
        if (std::abs(g) < 1e-15) {
            break;
        }
        if (g > 0.0) {
            hi = t;
        } else {
            lo = t;
        }
        double next = t - g / pdf(t);
        if (!(next > lo && next < hi)) {
            next = 0.5 * (lo + hi);
        }
        if (std::abs(next - t) < 1e-16) {
            t = next;
            break;
        }
        t = next;
    }
    return t;
}

double XDistribution::expect(const std::function<double(double)>& g, std::size_t panels) const
{
    auto edges = panel_edges(f_, panels);
    double s = 0.0;
    for (std::size_t i = 1; i < edges.size(); ++i) {
        s += gauss(edges[i - 1], edges[i], [&](double t) { return g(t) * pdf(t); });
    }
    return s;
}

std::vector<std::pair<double, double>> XDistribution::nodes(std::size_t panels) const
{
    auto edges = panel_edges(f_, panels);
    std::vector<std::pair<double, double>> out;
    out.reserve((edges.size() - 1) * kGaussNodes.size());
    for (std::size_t i = 1; i < edges.size(); ++i) {
        const double mid = 0.5 * (edges[i - 1] + edges[i]);
        const double half = 0.5 * (edges[i] - edges[i - 1]);
        for (std::size_t q = 0; q < kGaussNodes.size(); ++q) {
            const double t = mid + half * kGaussNodes[q];
            out.emplace_back(t, half * kGaussWeights[q] * pdf(t));
        }
    }
    return out;
}

double XDistribution::mean() const
{
    return law_ == XLaw::uniform ? f_.mean_uniform() : expect([this](double t) { return f_(t); });
}

double XDistribution::variance() const
{
    if (law_ == XLaw::uniform) {
        return f_.variance_uniform();
    }
    const double m = mean();
    return expect([&](double t) {
        double d = f_(t) - m;
        return d * d;
    });
}

} // namespace mickit
