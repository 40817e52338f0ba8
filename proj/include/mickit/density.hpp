#pragma once

// MIC* of a known density through its boundary entries, and the histogram
// estimator built on it.

#include "mickit/functions.hpp"
#include "mickit/info.hpp"
#include "mickit/partition.hpp"
#include "mickit/sample.hpp"

#include <cstddef>
#include <string>
#include <variant>
#include <vector>

namespace mickit {

/// Uniform density on [x_lo, x_hi] x [y_lo, y_hi].
struct UniformBox {
    double x_lo = 0.0;
    double x_hi = 1.0;
    double y_lo = 0.0;
    double y_hi = 1.0;
};

/// Law of (X + U[-a,a], f(X) + U[-b,b]) with X drawn from `x_law` on [0,1] and
/// the two noise terms independent. Requires b > 0; a may be 0.
struct FunctionBand {
    FunctionSpec function{FunctionKind::linear};
    XLaw x_law = XLaw::uniform;
    double b = 0.1;
    double a = 0.0;
};

/// Piecewise-constant density on [0,1]^2 with `rows` equal-height rows (y,
/// increasing) and `cols` equal-width columns. `masses` is row-major and sums
/// to one.
struct GridHistogram {
    std::size_t rows = 1;
    std::size_t cols = 1;
    std::vector<double> masses{1.0};
};

struct DensityComponent {
    double weight = 1.0;
    std::variant<UniformBox, FunctionBand, GridHistogram> shape;
};

/// A finite mixture of components with weights summing to one.
class DensitySpec {
public:
    explicit DensitySpec(std::vector<DensityComponent> components);

    static DensitySpec uniform_square();
    /// Half the mass uniform on [0,1/2]^2, half on [1/2,1]^2.
    static DensitySpec two_block();
    /// w * first + (1 - w) * second.
    static DensitySpec mixture(const DensitySpec& first, double w, const DensitySpec& second);

    const std::vector<DensityComponent>& components() const noexcept { return components_; }

    double pdf(double x, double y) const;
    double x_cdf(double x) const;
    double y_cdf(double y) const;

    /// Smallest box holding the support; it may extend beyond the unit square
    /// when band noise pushes mass outside.
    double x_min() const noexcept { return x_min_; }
    double x_max() const noexcept { return x_max_; }
    double y_min() const noexcept { return y_min_; }
    double y_max() const noexcept { return y_max_; }

private:
    std::vector<DensityComponent> components_;
    double x_min_;
    double x_max_;
    double y_min_;
    double y_max_;
};

struct PrecisionParams {
    /// The master grid has ceil(1/epsilon) rows and as many columns.
    double epsilon = 1.0 / 64.0;
    std::size_t s_max = 32;
    double stop_tol = 1e-3;
    /// Midpoint nodes per smooth piece for the coarse pass; the refined pass
    /// doubles them.
    std::size_t quadrature_nodes = 16;
    /// Latent nodes used to evaluate marginal CDFs of noisy bands.
    std::size_t cdf_nodes = 4096;

    void validate() const;
};

/// Cell masses of a density over a master grid whose rows and columns are
/// mass equipartitions of the marginals.
struct MassGrid {
    DiscreteJoint joint;
    std::vector<double> x_edges; // cols + 1 entries
    std::vector<double> y_edges; // rows + 1 entries
    /// Sum over cells of |refined - coarse| quadrature, plus any total-mass
    /// residual removed by normalization.
    double integration_error = 0.0;
};

/// Accepts coarse grids with epsilon up to 1/2; mic_star itself requires the
/// range checked by PrecisionParams::validate.
MassGrid discretize(const DensitySpec& density, const PrecisionParams& params);

/// Best I / ln k over partitions of the given axis of the master grid into at
/// most k parts, the other axis kept at full resolution.
double boundary_entry(const MassGrid& grid, std::size_t k, Axis axis);

struct MicStarResult {
    double value = 0.0;
    /// Additive error budget: discretization term plus quadrature term.
    double error_bound = 0.0;
    double discretization_term = 0.0;
    double quadrature_term = 0.0;
    std::size_t s_reached = 0;
    std::size_t argmax_k = 0;
    Axis argmax_axis = Axis::rows;
};

/// Discretization part of the error budget for boundary entries with up to
/// `s` parts on a master grid of resolution `epsilon`.
double discretization_error(double epsilon, std::size_t s);
/// Quadrature part of the error budget for total integration error E.
double quadrature_error(double integration_error);

MicStarResult mic_star(const MassGrid& grid, const PrecisionParams& params);
MicStarResult mic_star(const DensitySpec& density, const PrecisionParams& params);

/// Lower bound (nats) on the largest information of a k-by-k grid, by
/// alternating exact optimization of each axis over the master grid.
double unnormalized_surrogate(const MassGrid& grid, std::size_t k, std::size_t max_rounds = 20);

/// Equal-width histogram over the sample's bounding box, rescaled to [0,1]^2.
DensitySpec histogram_density(const SampleData& sample, std::size_t bins_per_axis);

/// Bins per axis used by mic_d: ceil(n^(1/3)).
std::size_t mic_d_bins(std::size_t n);

/// MIC* of the histogram density of the sample. Requires n >= 16.
MicStarResult mic_d(const SampleData& sample, const PrecisionParams& params = {});

/// JSON text with "schema_version": 1 and a "components" list.
DensitySpec density_spec_from_json(const std::string& text);
std::string density_spec_to_json(const DensitySpec& density);

} // namespace mickit
