#pragma once

#include <string>
#include <vector>

#include "fraclab/grid.hpp"

namespace fraclab {

enum class WeightKind { constant, sinusoid, checkerboard, tabulated };

/// A 1-periodic weight on the unit cell [0, 1), bounded away from zero and
/// infinity: 0 < rho_minus <= rho(x) <= rho_plus < inf.
///
/// Values at jump points follow the right-continuous convention.
class PeriodicWeight {
public:
    static PeriodicWeight constant(double value);
    /// base + amp * sin(2*pi*x); requires base - |amp| > 0.
    static PeriodicWeight sinusoid(double base, double amp);
    /// lo on [0, split), hi on [split, 1); requires lo, hi > 0 and split in (0, 1).
    static PeriodicWeight checkerboard(double lo, double hi, double split = 0.5);
    /// Piecewise-constant from equispaced unit-cell samples (value samples[i] on
    /// [i/n, (i+1)/n)); requires all samples > 0.
    static PeriodicWeight tabulated(std::vector<double> samples);

    /// Value of the 1-periodic extension at any real x.
    double operator()(double x) const;

    WeightKind kind() const { return kind_; }
    double rho_minus() const { return rho_minus_; }
    double rho_plus() const { return rho_plus_; }
    /// Exact unit-cell average (analytic per kind).
    double mean() const { return mean_; }
    /// Human-readable spec string ("sin:base=2,amp=1", ...), used in reports.
    const std::string& describe() const { return desc_; }

private:
    PeriodicWeight() = default;
    WeightKind kind_ = WeightKind::constant;
    double c0_ = 1.0, c1_ = 0.0, c2_ = 0.5;  // kind parameters
    std::vector<double> samples_;
    double rho_minus_ = 1.0, rho_plus_ = 1.0, mean_ = 1.0;
    std::string desc_;
};

/// Composite midpoint-rule approximation of the unit-cell average. Exact for
/// constant; exact for checkerboard when quad_cells resolves the split; O(quad_cells^-2)
/// for smooth kinds.
double weight_mean(const PeriodicWeight& w, int quad_cells);

/// rho_eps sampled cellwise on a grid: cell_values[i] = rho(midpoint_i / eps),
/// or the constant mean for the homogenized limit.
struct WeightField {
    Grid1D grid;
    std::vector<double> cell_values;
    double epsilon = 0.0;  // meaningless when is_limit
    bool is_limit = false;
    bool resolution_warning = false;  // h > eps/16
    double rho_minus = 0.0, rho_plus = 0.0;

    double min_value() const;
    double max_value() const;
};

/// Tag type selecting the homogenized-limit field (all cells = mean).
struct LimitEps {};
inline constexpr LimitEps limit_eps{};

/// Midpoint sampling of rho(x/eps). Throws std::invalid_argument for eps <= 0
/// or non-finite eps, ResolutionError for h > eps/2; sets resolution_warning
/// for h > eps/16.
WeightField sample_weight(const PeriodicWeight& w, const Grid1D& grid, double eps);
WeightField sample_weight(const PeriodicWeight& w, const Grid1D& grid, LimitEps);

/// True when eps is (numerically) the reciprocal of a positive integer.
bool is_reciprocal_eps(double eps);

/// Parse the CLI weight mini-language:
///   "const:3"  "sin:base=2,amp=1"  "checker:lo=1,hi=3"  "table:<path.csv>"
/// Throws std::invalid_argument with a message pointing at the offending part.
PeriodicWeight parse_weight_spec(const std::string& spec);

}  // namespace fraclab
