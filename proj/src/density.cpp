#include "mickit/density.hpp"

#include "mickit/diagnostics.hpp"
#include "mickit/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <string>

namespace mickit {
namespace {

constexpr double kCdfTolerance = 1e-10;
constexpr std::size_t kMaxBisection = 200;

double overlap(double a0, double a1, double b0, double b1) noexcept
{
    return std::max(0.0, std::min(a1, b1) - std::max(a0, b0));
}

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void validate_component(const DensityComponent& c)
{
    if (!std::isfinite(c.weight) || c.weight < 0.0) {
        throw InputError("component weight must be finite and non-negative");
    }
    std::visit(Overloaded{
                   [](const UniformBox& box) {
                       for (double v : {box.x_lo, box.x_hi, box.y_lo, box.y_hi}) {
                           if (!std::isfinite(v)) {
                               throw InputError("uniform box bounds must be finite");
                           }
                       }
                       if (!(box.x_lo < box.x_hi) || !(box.y_lo < box.y_hi)) {
                           throw InputError("uniform box needs lo < hi on both axes");
                       }
                   },
                   [](const FunctionBand& band) {
                       if (!std::isfinite(band.b) || !(band.b > 0.0)) {
                           throw InputError("function band needs a finite y half-width b > 0; noiseless curves have "
                                            "no density");
                       }
                       if (!std::isfinite(band.a) || band.a < 0.0) {
                           throw InputError("function band needs a finite x half-width a >= 0");
                       }
                   },
                   [](const GridHistogram& h) {
                       if (h.rows == 0 || h.cols == 0 || h.masses.size() != h.rows * h.cols) {
                           throw InputError("grid histogram shape does not match its masses");
                       }
                       for (double m : h.masses) {
                           if (!std::isfinite(m) || m < 0.0) {
                               throw InputError("grid histogram masses must be finite and non-negative");
                           }
                       }
                       if (std::abs(stable_sum(h.masses) - 1.0) > kMassTolerance) {
                           throw InputError("grid histogram masses must sum to 1");
                       }
                   },
               },
               c.shape);
}

// A component with the precomputed state needed for CDFs and quadrature.
struct Prepared {
    double weight;
    const DensityComponent* source;
    std::unique_ptr<XDistribution> law;
    std::vector<double> latent_t;  // X quantiles at midpoint levels
    std::vector<double> latent_f;  // f at latent_t

    double x_cdf(double x) const
    {
        return std::visit(Overloaded{
                              [&](const UniformBox& box) {
                                  return std::clamp((x - box.x_lo) / (box.x_hi - box.x_lo), 0.0, 1.0);
                              },
                              [&](const FunctionBand& band) {
                                  if (band.a == 0.0) {
                                      return law->cdf(x);
                                  }
                                  double s = 0.0;
                                  for (double t : latent_t) {
                                      s += std::clamp((x - t + band.a) / (2.0 * band.a), 0.0, 1.0);
                                  }
                                  return s / static_cast<double>(latent_t.size());
                              },
                              [&](const GridHistogram& h) { return histogram_cdf(h, x, true); },
                          },
                          source->shape);
    }

    double y_cdf(double y) const
    {
        return std::visit(Overloaded{
                              [&](const UniformBox& box) {
                                  return std::clamp((y - box.y_lo) / (box.y_hi - box.y_lo), 0.0, 1.0);
                              },
                              [&](const FunctionBand& band) {
                                  double s = 0.0;
                                  for (double f : latent_f) {
                                      s += std::clamp((y - f + band.b) / (2.0 * band.b), 0.0, 1.0);
                                  }
                                  return s / static_cast<double>(latent_f.size());
                              },
                              [&](const GridHistogram& h) { return histogram_cdf(h, y, false); },
                          },
                          source->shape);
    }

    static double histogram_cdf(const GridHistogram& h, double v, bool x_axis)
    {
        const std::size_t parts = x_axis ? h.cols : h.rows;
        double pos = std::clamp(v, 0.0, 1.0) * static_cast<double>(parts);
        double s = 0.0;
        for (std::size_t p = 0; p < parts; ++p) {
            double frac = std::clamp(pos - static_cast<double>(p), 0.0, 1.0);
            if (frac == 0.0) {
                break;
            }
            double marginal = 0.0;
            if (x_axis) {
                for (std::size_t r = 0; r < h.rows; ++r) {
                    marginal += h.masses[r * h.cols + p];
                }
            } else {
                for (std::size_t c = 0; c < h.cols; ++c) {
                    marginal += h.masses[p * h.cols + c];
                }
            }
            s += frac * marginal;
        }
        return std::min(s, 1.0);
    }
};

std::vector<Prepared> prepare(const DensitySpec& density, std::size_t cdf_nodes)
{
    std::vector<Prepared> out;
    for (const auto& c : density.components()) {
        if (c.weight == 0.0) {
            continue;
        }
        Prepared p{c.weight, &c, nullptr, {}, {}};
        if (const auto* band = std::get_if<FunctionBand>(&c.shape)) {
            p.law = std::make_unique<XDistribution>(band->function, band->x_law);
            p.latent_t.resize(cdf_nodes);
            p.latent_f.resize(cdf_nodes);
            for (std::size_t i = 0; i < cdf_nodes; ++i) {
                double t = p.law->quantile((static_cast<double>(i) + 0.5) / static_cast<double>(cdf_nodes));
                p.latent_t[i] = t;
                p.latent_f[i] = band->function(t);
            }
        }
        out.push_back(std::move(p));
    }
    return out;
}

// Smallest points of [lo, hi] reaching each `level` quantile of a CDF, by
// bisection down to adjacent doubles.
std::vector<double> quantile_edges(const std::function<double(double)>& cdf, double lo, double hi, std::size_t parts)
{
    std::vector<double> edges(parts + 1);
    edges.front() = lo;
    edges.back() = hi;
    for (std::size_t j = 1; j < parts; ++j) {
        const double level = static_cast<double>(j) / static_cast<double>(parts);
        double a = edges[j - 1];
        double b = hi;
        for (std::size_t it = 0; it < kMaxBisection; ++it) {
            double mid = 0.5 * (a + b);
            if (!(mid > a && mid < b)) {
                break;
            }
            if (cdf(mid) < level) {
                a = mid;
            } else {
                b = mid;
            }
        }
        if (b - a > kCdfTolerance) {
            throw NumericError("quantile bisection did not converge");
        }
        edges[j] = b;
    }
    return edges;
}

std::vector<double> overlap_fractions(const std::vector<double>& edges, double lo, double hi)
{
    std::vector<double> out(edges.size() - 1);
    for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
        out[i] = overlap(edges[i], edges[i + 1], lo, hi) / (hi - lo);
    }
    return out;
}

void add_box(std::vector<double>& mass, const MassGrid& g, double w, const UniformBox& box)
{
    auto oy = overlap_fractions(g.y_edges, box.y_lo, box.y_hi);
    auto ox = overlap_fractions(g.x_edges, box.x_lo, box.x_hi);
    const std::size_t cols = ox.size();
    for (std::size_t i = 0; i < oy.size(); ++i) {
        for (std::size_t j = 0; j < cols; ++j) {
            mass[i * cols + j] += w * oy[i] * ox[j];
        }
    }
}

void add_histogram(std::vector<double>& mass, const MassGrid& g, double w, const GridHistogram& h)
{
    const std::size_t rows = g.y_edges.size() - 1;
    const std::size_t cols = g.x_edges.size() - 1;
    // Fraction of histogram column c falling in master column j, and likewise for rows.
    std::vector<double> ox(cols * h.cols);
    for (std::size_t j = 0; j < cols; ++j) {
        for (std::size_t c = 0; c < h.cols; ++c) {
            double lo = static_cast<double>(c) / static_cast<double>(h.cols);
            double hi = static_cast<double>(c + 1) / static_cast<double>(h.cols);
            ox[j * h.cols + c] = overlap(g.x_edges[j], g.x_edges[j + 1], lo, hi) / (hi - lo);
        }
    }
    std::vector<double> oy(rows * h.rows);
    for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t r = 0; r < h.rows; ++r) {
            double lo = static_cast<double>(r) / static_cast<double>(h.rows);
            double hi = static_cast<double>(r + 1) / static_cast<double>(h.rows);
            oy[i * h.rows + r] = overlap(g.y_edges[i], g.y_edges[i + 1], lo, hi) / (hi - lo);
        }
    }
    std::vector<double> t(h.rows * cols, 0.0); // histogram rows by master columns
    for (std::size_t r = 0; r < h.rows; ++r) {
        for (std::size_t j = 0; j < cols; ++j) {
            double s = 0.0;
            for (std::size_t c = 0; c < h.cols; ++c) {
                s += h.masses[r * h.cols + c] * ox[j * h.cols + c];
            }
            t[r * cols + j] = s;
        }
    }
    for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t j = 0; j < cols; ++j) {
            double s = 0.0;
            for (std::size_t r = 0; r < h.rows; ++r) {
                s += oy[i * h.rows + r] * t[r * cols + j];
            }
            mass[i * cols + j] += w * s;
        }
    }
}

// Returns the sum of |refined - coarse| over cells, weighted.
double add_band(std::vector<double>& mass, const MassGrid& g, double w, const FunctionBand& band,
                const XDistribution& law, std::size_t nodes)
{
    const auto& f = band.function;
    const auto& ye = g.y_edges;
    const std::size_t rows = ye.size() - 1;
    const std::size_t cols = g.x_edges.size() - 1;
    const double a = band.a;
    const double b = band.b;
    std::vector<double> coarse(rows);
    std::vector<double> refined(rows);
    double error = 0.0;

    std::vector<double> monotone{0.0};
    monotone.insert(monotone.end(), f.breakpoints().begin(), f.breakpoints().end());
    monotone.push_back(1.0);

    auto integrate = [&](double u, double v, std::size_t q, double x0, double x1, std::vector<double>& acc) {
        const double h = (v - u) / static_cast<double>(q);
        for (std::size_t k = 0; k < q; ++k) {
            const double t = u + (static_cast<double>(k) + 0.5) * h;
            double ox = a == 0.0 ? 1.0 : overlap(t - a, t + a, x0, x1) / (2.0 * a);
            double weight = h * law.pdf(t) * ox;
            if (weight == 0.0) {
                continue;
            }
            const double fy = f(t);
            auto it = std::upper_bound(ye.begin(), ye.end(), fy - b);
            std::size_t i = it == ye.begin() ? 0 : static_cast<std::size_t>(it - ye.begin()) - 1;
            for (; i < rows && ye[i] < fy + b; ++i) {
                acc[i] += weight * overlap(fy - b, fy + b, ye[i], ye[i + 1]) / (2.0 * b);
            }
        }
    };

    for (std::size_t j = 0; j < cols; ++j) {
        const double x0 = g.x_edges[j];
        const double x1 = g.x_edges[j + 1];
        const double t_lo = std::max(0.0, x0 - a);
        const double t_hi = std::min(1.0, x1 + a);
        if (!(t_lo < t_hi)) {
            continue;
        }
        std::vector<double> breaks{t_lo, t_hi};
        for (double t : f.breakpoints()) {
            breaks.push_back(t);
        }
        if (a > 0.0) {
            for (double t : {x0 - a, x0 + a, x1 - a, x1 + a}) {
                breaks.push_back(t);
            }
        }
        // Kinks where the band edge crosses a row edge.
        for (std::size_t p = 0; p + 1 < monotone.size(); ++p) {
            const double lo = std::max(t_lo, monotone[p]);
            const double hi = std::min(t_hi, monotone[p + 1]);
            if (!(lo < hi)) {
                continue;
            }
            const double f_lo = std::min(f(lo), f(hi));
            const double f_hi = std::max(f(lo), f(hi));
            auto first = std::lower_bound(ye.begin(), ye.end(), f_lo - b);
            auto last = std::upper_bound(ye.begin(), ye.end(), f_hi + b);
            for (auto it = first; it != last; ++it) {
                for (double level : {*it - b, *it + b}) {
                    for (double t : solve_on_piece(f, lo, hi, level)) {
                        breaks.push_back(t);
                    }
                }
            }
        }
        std::sort(breaks.begin(), breaks.end());
        breaks.erase(std::remove_if(breaks.begin(), breaks.end(), [&](double t) { return t < t_lo || t > t_hi; }),
                     breaks.end());
        breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());

        std::fill(coarse.begin(), coarse.end(), 0.0);
        std::fill(refined.begin(), refined.end(), 0.0);
        for (std::size_t s = 0; s + 1 < breaks.size(); ++s) {
            integrate(breaks[s], breaks[s + 1], nodes, x0, x1, coarse);
            integrate(breaks[s], breaks[s + 1], 2 * nodes, x0, x1, refined);
        }
        for (std::size_t i = 0; i < rows; ++i) {
            mass[i * cols + j] += w * refined[i];
            error += w * std::abs(refined[i] - coarse[i]);
        }
    }
    return error;
}

std::vector<double> axis_major(const DiscreteJoint& joint, Axis axis)
{
    if (axis == Axis::rows) {
        return {joint.mass().begin(), joint.mass().end()};
    }
    auto t = joint.transposed();
    return {t.mass().begin(), t.mass().end()};
}

PartitionSearch axis_search(const DiscreteJoint& joint, Axis axis)
{
    auto weights = axis_major(joint, axis);
    const std::size_t cells = axis == Axis::rows ? joint.rows() : joint.cols();
    const std::size_t bins = axis == Axis::rows ? joint.cols() : joint.rows();
    return PartitionSearch::dense(cells, bins, weights);
}

// Mass of `joint` with rows (or columns) merged according to integer cuts.
std::vector<double> fold(const DiscreteJoint& joint, Axis axis, const Partition& groups, std::size_t& parts_out)
{
    auto weights = axis_major(joint, axis);
    const std::size_t cells = axis == Axis::rows ? joint.rows() : joint.cols();
    const std::size_t bins = axis == Axis::rows ? joint.cols() : joint.rows();
    parts_out = groups.parts();
    // Result is bins-major with `parts_out` columns, ready to optimize the other axis.
    std::vector<double> out(bins * parts_out, 0.0);
    for (std::size_t c = 0; c < cells; ++c) {
        std::size_t g = groups.bin_of(static_cast<double>(c));
        for (std::size_t b = 0; b < bins; ++b) {
            out[b * parts_out + g] += weights[c * bins + b];
        }
    }
    return out;
}

double fold_information(const std::vector<double>& weights, std::size_t cells, std::size_t bins,
                        const Partition& cuts)
{
    std::vector<double> merged(cuts.parts() * bins, 0.0);
    for (std::size_t c = 0; c < cells; ++c) {
        std::size_t g = cuts.bin_of(static_cast<double>(c));
        for (std::size_t b = 0; b < bins; ++b) {
            merged[g * bins + b] += weights[c * bins + b];
        }
    }
    return mutual_information(DiscreteJoint::normalized(cuts.parts(), bins, std::move(merged)));
}

} // namespace

DensitySpec::DensitySpec(std::vector<DensityComponent> components) : components_{std::move(components)}
{
    if (components_.empty()) {
        throw InputError("density needs at least one component");
    }
    std::vector<double> weights;
    for (const auto& c : components_) {
        validate_component(c);
        weights.push_back(c.weight);
    }
    if (std::abs(stable_sum(weights) - 1.0) > kMassTolerance) {
        throw InputError("component weights must sum to 1");
    }
    constexpr double inf = std::numeric_limits<double>::infinity();
    x_min_ = y_min_ = inf;
    x_max_ = y_max_ = -inf;
    for (const auto& c : components_) {
        if (c.weight == 0.0) {
            continue;
        }
        std::visit(Overloaded{
                       [&](const UniformBox& box) {
                           x_min_ = std::min(x_min_, box.x_lo);
                           x_max_ = std::max(x_max_, box.x_hi);
                           y_min_ = std::min(y_min_, box.y_lo);
                           y_max_ = std::max(y_max_, box.y_hi);
                       },
                       [&](const FunctionBand& band) {
                           auto [lo, hi] = band.function.range();
                           x_min_ = std::min(x_min_, -band.a);
                           x_max_ = std::max(x_max_, 1.0 + band.a);
                           y_min_ = std::min(y_min_, lo - band.b);
                           y_max_ = std::max(y_max_, hi + band.b);
                       },
                       [&](const GridHistogram&) {
                           x_min_ = std::min(x_min_, 0.0);
                           x_max_ = std::max(x_max_, 1.0);
                           y_min_ = std::min(y_min_, 0.0);
                           y_max_ = std::max(y_max_, 1.0);
                       },
                   },
                   c.shape);
    }
}

DensitySpec DensitySpec::uniform_square()
{
    return DensitySpec({{1.0, UniformBox{}}});
}

DensitySpec DensitySpec::two_block()
{
    return DensitySpec({{0.5, UniformBox{0.0, 0.5, 0.0, 0.5}}, {0.5, UniformBox{0.5, 1.0, 0.5, 1.0}}});
}

DensitySpec DensitySpec::mixture(const DensitySpec& first, double w, const DensitySpec& second)
{
    if (!(w >= 0.0 && w <= 1.0)) {
        throw InputError("mixture weight must lie in [0, 1]");
    }
    std::vector<DensityComponent> out;
    for (auto c : first.components()) {
        c.weight *= w;
        out.push_back(std::move(c));
    }
    for (auto c : second.components()) {
        c.weight *= 1.0 - w;
        out.push_back(std::move(c));
    }
    // Rescale so that rounding in the products cannot break the unit total.
    double total = 0.0;
    for (const auto& c : out) {
        total += c.weight;
    }
    for (auto& c : out) {
        c.weight /= total;
    }
    return DensitySpec(std::move(out));
}

double DensitySpec::pdf(double x, double y) const
{
    double s = 0.0;
    for (const auto& c : components_) {
        if (c.weight == 0.0) {
            continue;
        }
        s += c.weight *
             std::visit(Overloaded{
                            [&](const UniformBox& box) {
                                bool inside = x >= box.x_lo && x <= box.x_hi && y >= box.y_lo && y <= box.y_hi;
                                return inside ? 1.0 / ((box.x_hi - box.x_lo) * (box.y_hi - box.y_lo)) : 0.0;
                            },
                            [&](const FunctionBand& band) {
                                XDistribution law(band.function, band.x_law);
                                const auto& f = band.function;
                                if (band.a == 0.0) {
                                    return std::abs(y - f(x)) <= band.b ? law.pdf(x) / (2.0 * band.b) : 0.0;
                                }
                                // Integrate the X density over {t : |x - t| <= a, |y - f(t)| <= b}.
                                const double lo = std::max(0.0, x - band.a);
                                const double hi = std::min(1.0, x + band.a);
                                if (!(lo < hi)) {
                                    return 0.0;
                                }
                                std::vector<double> cuts{lo, hi};
                                std::vector<double> mono{0.0};
                                mono.insert(mono.end(), f.breakpoints().begin(), f.breakpoints().end());
                                mono.push_back(1.0);
                                for (std::size_t p = 0; p + 1 < mono.size(); ++p) {
                                    double u = std::max(lo, mono[p]);
                                    double v = std::min(hi, mono[p + 1]);
                                    if (!(u < v)) {
                                        continue;
                                    }
                                    cuts.push_back(u);
                                    cuts.push_back(v);
                                    for (double level : {y - band.b, y + band.b}) {
                                        for (double t : solve_on_piece(f, u, v, level)) {
                                            cuts.push_back(t);
                                        }
                                    }
                                }
                                std::sort(cuts.begin(), cuts.end());
                                double mass = 0.0;
                                for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
                                    double mid = 0.5 * (cuts[i] + cuts[i + 1]);
                                    if (std::abs(y - f(mid)) <= band.b) {
                                        mass += law.cdf(cuts[i + 1]) - law.cdf(cuts[i]);
                                    }
                                }
                                return mass / (4.0 * band.a * band.b);
                            },
                            [&](const GridHistogram& h) {
                                if (x < 0.0 || x > 1.0 || y < 0.0 || y > 1.0) {
                                    return 0.0;
                                }
                                auto c = std::min(h.cols - 1, static_cast<std::size_t>(x * static_cast<double>(h.cols)));
                                auto r = std::min(h.rows - 1, static_cast<std::size_t>(y * static_cast<double>(h.rows)));
                                return h.masses[r * h.cols + c] * static_cast<double>(h.rows * h.cols);
                            },
                        },
                        c.shape);
    }
    return s;
}

double DensitySpec::x_cdf(double x) const
{
    double s = 0.0;
    for (const auto& p : prepare(*this, PrecisionParams{}.cdf_nodes)) {
        s += p.weight * p.x_cdf(x);
    }
    return std::min(s, 1.0);
}

double DensitySpec::y_cdf(double y) const
{
    double s = 0.0;
    for (const auto& p : prepare(*this, PrecisionParams{}.cdf_nodes)) {
        s += p.weight * p.y_cdf(y);
    }
    return std::min(s, 1.0);
}

namespace {

void validate_quadrature(const PrecisionParams& params)
{
    if (!(params.epsilon > 0.0 && params.epsilon <= 0.5)) {
        throw PreconditionError("master grid epsilon must lie in (0, 1/2], got " + std::to_string(params.epsilon));
    }
    if (!(params.stop_tol >= 0.0) || params.quadrature_nodes == 0 || params.cdf_nodes == 0) {
        throw PreconditionError("invalid precision parameters");
    }
}

} // namespace

void PrecisionParams::validate() const
{
    if (!(epsilon > 0.0 && epsilon <= 0.125)) {
        throw PreconditionError("precision epsilon must lie in (0, 1/8], got " + std::to_string(epsilon));
    }
    if (s_max < 2) {
        throw PreconditionError("s_max must be at least 2");
    }
    if (!(stop_tol >= 0.0) || quadrature_nodes == 0 || cdf_nodes == 0) {
        throw PreconditionError("invalid precision parameters");
    }
}

MassGrid discretize(const DensitySpec& density, const PrecisionParams& params)
{
    validate_quadrature(params);
    const auto resolution = static_cast<std::size_t>(std::ceil(1.0 / params.epsilon - 1e-9));
    auto prepared = prepare(density, params.cdf_nodes);
    auto x_cdf = [&](double x) {
        double s = 0.0;
        for (const auto& p : prepared) {
            s += p.weight * p.x_cdf(x);
        }
        return s;
    };
    auto y_cdf = [&](double y) {
        double s = 0.0;
        for (const auto& p : prepared) {
            s += p.weight * p.y_cdf(y);
        }
        return s;
    };

    MassGrid grid{DiscreteJoint(1, 1, {1.0}), {}, {}, 0.0};
    grid.x_edges = quantile_edges(x_cdf, density.x_min(), density.x_max(), resolution);
    grid.y_edges = quantile_edges(y_cdf, density.y_min(), density.y_max(), resolution);

    std::vector<double> mass(resolution * resolution, 0.0);
    double error = 0.0;
    for (const auto& p : prepared) {
        std::visit(Overloaded{
                       [&](const UniformBox& box) { add_box(mass, grid, p.weight, box); },
                       [&](const FunctionBand& band) {
                           error += add_band(mass, grid, p.weight, band, *p.law, params.quadrature_nodes);
                       },
                       [&](const GridHistogram& h) { add_histogram(mass, grid, p.weight, h); },
                   },
                   p.source->shape);
    }
    for (double& m : mass) {
        m = std::max(m, 0.0);
    }
    const double total = stable_sum(mass);
    if (!(total > 0.0) || !std::isfinite(total)) {
        throw NumericError("discretized density has no mass");
    }
    error += std::abs(1.0 - total);
    grid.joint = DiscreteJoint::normalized(resolution, resolution, std::move(mass));
    grid.integration_error = error;
    return grid;
}

double boundary_entry(const MassGrid& grid, std::size_t k, Axis axis)
{
    const std::size_t resolution = axis == Axis::rows ? grid.joint.rows() : grid.joint.cols();
    if (k < 2) {
        throw PreconditionError("boundary entry needs k >= 2");
    }
    if (k > resolution) {
        throw PreconditionError("boundary entry k=" + std::to_string(k) + " exceeds grid resolution " +
                                std::to_string(resolution));
    }
    auto search = axis_search(grid.joint, axis);
    double info = 0.0;
    for (std::size_t p = 0; p < k; ++p) {
        info = search.advance();
    }
    return std::clamp(info / std::log(static_cast<double>(k)), 0.0, 1.0);
}

double discretization_error(double epsilon, std::size_t s)
{
    double worst = 0.0;
    for (std::size_t k = 2; k <= s; ++k) {
        const double spread = static_cast<double>(k - 1) * epsilon;
        const double term = 2.0 * (binary_entropy(std::min(spread, 0.5)) + spread) +
                            static_cast<double>(k) * binary_entropy(std::min(epsilon, 0.5));
        worst = std::max(worst, term / std::log(static_cast<double>(k)));
    }
    return worst;
}

double quadrature_error(double integration_error)
{
    const double delta = 0.5 * integration_error;
    return 4.0 * binary_entropy(std::min(2.0 * delta, 0.5)) / std::log(2.0) + 7.0 * delta;
}

MicStarResult mic_star(const MassGrid& grid, const PrecisionParams& params)
{
    params.validate();
    const std::size_t limit = std::min({params.s_max, grid.joint.rows(), grid.joint.cols()});
    if (limit < 2) {
        throw PreconditionError("master grid is too coarse for boundary entries");
    }
    auto rows = axis_search(grid.joint, Axis::rows);
    auto cols = axis_search(grid.joint, Axis::cols);
    rows.advance();
    cols.advance();

    MicStarResult r;
    double previous = 0.0;
    for (std::size_t s = 2; s <= limit; ++s) {
        const double norm = std::log(static_cast<double>(s));
        const double by_rows = std::clamp(rows.advance() / norm, 0.0, 1.0);
        const double by_cols = std::clamp(cols.advance() / norm, 0.0, 1.0);
        if (s == 2 || by_rows > r.value) {
            r.value = by_rows;
            r.argmax_k = s;
            r.argmax_axis = Axis::rows;
        }
        if (by_cols > r.value) {
            r.value = by_cols;
            r.argmax_k = s;
            r.argmax_axis = Axis::cols;
        }
        r.s_reached = s;
        if (s >= 3 && r.value - previous < params.stop_tol) {
            break;
        }
        previous = r.value;
    }
    const double epsilon = 1.0 / static_cast<double>(std::max(grid.joint.rows(), grid.joint.cols()));
    r.discretization_term = discretization_error(epsilon, r.s_reached);
    r.quadrature_term = quadrature_error(grid.integration_error);
    r.error_bound = r.discretization_term + r.quadrature_term;
    return r;
}

MicStarResult mic_star(const DensitySpec& density, const PrecisionParams& params)
{
    return mic_star(discretize(density, params), params);
}

double unnormalized_surrogate(const MassGrid& grid, std::size_t k, std::size_t max_rounds)
{
    const auto& joint = grid.joint;
    if (k < 2 || k > joint.rows() || k > joint.cols()) {
        throw PreconditionError("surrogate needs 2 <= k <= grid resolution");
    }
    // Start from an equal-count grouping of the master columns.
    std::vector<double> cuts;
    for (std::size_t j = 1; j < k; ++j) {
        cuts.push_back(std::round(static_cast<double>(j * joint.cols()) / static_cast<double>(k)));
    }
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    Partition col_groups(std::move(cuts));

    double best = 0.0;
    for (std::size_t round = 0; round < max_rounds; ++round) {
        std::size_t parts = 0;
        auto by_rows = fold(joint, Axis::cols, col_groups, parts);
        PartitionSearch rows(PartitionSearch::dense(joint.rows(), parts, by_rows));
        for (std::size_t p = 0; p < k; ++p) {
            rows.advance();
        }
        Partition row_groups = rows.partition(k);

        auto by_cols = fold(joint, Axis::rows, row_groups, parts);
        PartitionSearch cols(PartitionSearch::dense(joint.cols(), parts, by_cols));
        for (std::size_t p = 0; p < k; ++p) {
            cols.advance();
        }
        col_groups = cols.partition(k);
        const double info = fold_information(by_cols, joint.cols(), parts, col_groups);
        if (info <= best + 1e-12) {
            best = std::max(best, info);
            break;
        }
        best = info;
    }
    return best;
}

std::size_t mic_d_bins(std::size_t n)
{
    return static_cast<std::size_t>(std::ceil(std::cbrt(static_cast<double>(n)) - 1e-9));
}

DensitySpec histogram_density(const SampleData& sample, std::size_t bins_per_axis)
{
    const std::size_t n = sample.size();
    if (bins_per_axis == 0) {
        throw PreconditionError("histogram needs at least one bin per axis");
    }
    if (n < bins_per_axis * bins_per_axis) {
        throw PreconditionError("histogram with " + std::to_string(bins_per_axis) + " bins per axis needs at least " +
                                std::to_string(bins_per_axis * bins_per_axis) + " points, got " + std::to_string(n));
    }
    double x_lo = sample[0].x;
    double x_hi = x_lo;
    double y_lo = sample[0].y;
    double y_hi = y_lo;
    for (const auto& p : sample.points()) {
        x_lo = std::min(x_lo, p.x);
        x_hi = std::max(x_hi, p.x);
        y_lo = std::min(y_lo, p.y);
        y_hi = std::max(y_hi, p.y);
    }
    auto bin = [bins_per_axis](double v, double lo, double hi) -> std::size_t {
        if (!(hi > lo)) {
            return 0;
        }
        auto b = static_cast<std::size_t>((v - lo) / (hi - lo) * static_cast<double>(bins_per_axis));
        return std::min(b, bins_per_axis - 1);
    };
    GridHistogram h{bins_per_axis, bins_per_axis, std::vector<double>(bins_per_axis * bins_per_axis, 0.0)};
    for (const auto& p : sample.points()) {
        h.masses[bin(p.y, y_lo, y_hi) * bins_per_axis + bin(p.x, x_lo, x_hi)] += 1.0;
    }
    for (double& m : h.masses) {
        m /= static_cast<double>(n);
    }
    return DensitySpec({{1.0, std::move(h)}});
}

MicStarResult mic_d(const SampleData& sample, const PrecisionParams& params)
{
    if (sample.size() < 16) {
        throw PreconditionError("MICd needs at least 16 points, got " + std::to_string(sample.size()));
    }
    return mic_star(histogram_density(sample, mic_d_bins(sample.size())), params);
}

} // namespace mickit
