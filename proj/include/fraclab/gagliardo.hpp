#pragma once

#include <span>
#include <string>
#include <vector>

#include "fraclab/grid.hpp"

namespace fraclab {

/// Fractional order s in (0,1) and integrability exponent p in (1,inf).
struct FracParams {
    double s = 0.5;
    double p = 2.0;

    double sp() const { return s * p; }
};

/// Throws std::invalid_argument unless 0 < s < 1 and 1 < p < inf.
void validate(const FracParams& params);

/// Throws HypothesisError unless s > 1/p (Neumann-rate / boundary-layer hypothesis).
void require_s_above_one_over_p(const FracParams& params);

enum class FormVariant { DirichletExterior, RegionalNeumann };

std::string to_string(FormVariant v);

/// One cached quadrature point for an (element i, element i+gap) pair, in
/// element-local coordinates. The weight carries the kernel |x-y|^{-(1+sp)}
/// in unit coordinates, the pair Jacobian, the h^{1-sp} physical scale and,
/// for gap >= 1, the factor 2 accounting for the mirrored ordered pair.
struct PairQuadPoint {
    double theta_x;
    double theta_y;
    double w;
};

/// All quadrature points shared by every element pair at a fixed index gap.
/// On a uniform grid the kernel is translation invariant, so one table per
/// gap covers every unordered pair exactly once.
struct GapTable {
    int gap = 0;
    std::vector<PairQuadPoint> points;
};

/// Quadrature point for the exterior correction 2 * int |u|^p kappa(x) dx with
/// kappa(x) = ((x-a)^{-sp} + (b-x)^{-sp}) / (sp). Weights are fully scaled:
/// the term contributes w * |u(cell, theta)|^p to the energy.
struct ExteriorQuadPoint {
    int cell;
    double theta;
    double w;
};

/// Cached singular-kernel quadrature for the discrete Gagliardo p-energy of
/// continuous piecewise-linear interpolants on a uniform grid.
///
/// Pair classes:
///   gap 0   - identical elements: the difference quotient is constant along
///             rays, so the radial power integral has a closed form; a single
///             synthetic point (theta_x, theta_y) = (0, 1) reproduces it.
///   gap 1   - touching elements: Duffy split into the two subtriangles of the
///             shared-vertex square; the singular radial direction integrates
///             in closed form, leaving a smooth 1D Gauss rule per triangle.
///   gap >=2 - disjoint elements: tensor Gauss against the smooth kernel, with
///             elevated order for near gaps.
class GagliardoDiscretization {
public:
    Grid1D grid;
    FracParams params;
    FormVariant variant = FormVariant::DirichletExterior;
    int quad_order = 6;

    std::vector<GapTable> gap_tables;          // indexed by gap = 0 .. n_cells-1
    std::vector<ExteriorQuadPoint> exterior;   // empty for RegionalNeumann
    double kernel_scale = 1.0;                 // h^{1-sp}

    /// Free degrees of freedom: interior nodes for DirichletExterior,
    /// all nodes for RegionalNeumann.
    int n_dofs() const {
        return variant == FormVariant::DirichletExterior ? grid.n_cells - 1
                                                         : grid.n_cells + 1;
    }
    /// Index of the first free node in the full nodal numbering.
    int dof_offset() const { return variant == FormVariant::DirichletExterior ? 1 : 0; }

    std::size_t total_points() const;
};

/// Closed form of kappa(x) = int_{R \ (a,b)} |x-y|^{-(1+sp)} dy
///                        = ((x-a)^{-sp} + (b-x)^{-sp}) / (sp).
/// Throws std::domain_error unless a < x < b.
double exterior_density(double x, const FracParams& params, double a, double b);

/// Builds the cached pair and exterior quadrature. Throws std::invalid_argument
/// for quad_order < 3.
GagliardoDiscretization build_discretization(const Grid1D& grid, const FracParams& params,
                                             FormVariant variant, int quad_order = 6);

/// Gagliardo p-energy of the interpolant of the free-dof vector u: the double
/// integral over the pair classes plus, for DirichletExterior, the exterior
/// correction. Throws std::invalid_argument on dimension mismatch.
double energy_p(std::span<const double> u, const GagliardoDiscretization& disc);

/// Gradient of energy_p with respect to the free dofs. smoothing_eta > 0
/// replaces |t|^{p-2} t by (t^2 + eta^2)^{(p-2)/2} t, which the minimizer uses
/// for p < 2; the default 0 is the exact gradient of the quadrature sum.
std::vector<double> energy_grad_p(std::span<const double> u, const GagliardoDiscretization& disc,
                                  double smoothing_eta = 0.0);

/// Binary cache of the quadrature tables, keyed by
/// (a, b, n_cells, s, p, variant, quad_order) with a versioned header.
/// save returns false (and writes nothing) only on I/O failure; try_load
/// returns false on missing file, version or key mismatch.
bool save_discretization_cache(const GagliardoDiscretization& disc, const std::string& path);
bool try_load_discretization_cache(const Grid1D& grid, const FracParams& params,
                                   FormVariant variant, int quad_order, const std::string& path,
                                   GagliardoDiscretization& out);

/// build_discretization with a cache directory: load on hit, build and store
/// on miss. Empty cache_dir just builds.
GagliardoDiscretization build_discretization_cached(const Grid1D& grid, const FracParams& params,
                                                    FormVariant variant, int quad_order,
                                                    const std::string& cache_dir);

}  // namespace fraclab
