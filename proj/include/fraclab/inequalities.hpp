#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fraclab/gagliardo.hpp"
#include "fraclab/homogenize.hpp"
#include "fraclab/spectral.hpp"
#include "fraclab/weight.hpp"

namespace fraclab {

/// Sweep of best-constant estimates for one of the auxiliary inequalities.
struct ConstantReport {
    std::vector<double> sweep_values;  // eps or delta, strictly decreasing
    std::vector<double> constants;
    std::vector<double> normalized;    // constants divided by the predicted power
    std::optional<RateFit> fit;
    std::string method;
    bool converged = true;  // only meaningful for convergence-style sweeps
};

/// Best constant C_P(eps) = sup_u ||Pi u - mean||_p / [Pi u]_{W^{s,p}} on the
/// grid (0, eps, n_cells) with the regional seminorm. Exact eigenvalue route
/// for p = 2, projected-gradient maximization for general p.
double poincare_constant(int n_cells, const FracParams& params, double eps, int quad_order = 6,
                         const MinimizerOptions& opts = {});

/// Max over probes v of |int g(x/eps)|v|^p| / D(v), with g = rho - mean(rho).
/// Dirichlet variant: D = [v]_{W^{s,p}(R)} ||v||_p^{p-1} and interior probes;
/// RegionalNeumann: D = ||v||^p_{W^{s,p}} and free probes. Probes are
/// probe_count seeded gaussian vectors plus the first five p = 2 eigenvectors.
double oscillation_ratio(const PeriodicWeight& w, double eps, const GagliardoDiscretization& disc,
                         int probe_count, std::uint64_t seed);

/// sigma(delta)^{1/p} with sigma = sup_u ||u||^p_{Lp(G_delta)} / ||u||^p_{W^{s,p}},
/// G_delta the two boundary intervals of width delta in (0,1). Largest
/// generalized eigenvalue for p = 2. Requires s > 1/p and 0 < delta <= 1/2.
double boundary_layer_constant(double delta, const FracParams& params, int n_cells,
                               int quad_order = 6);

/// Lemma check |x|^p - |y|^p <= p |x|^{p-2} x . (x - y) for vectors; a false
/// return on valid inputs indicates a bug in the caller's norms.
bool pointwise_p_inequality(std::span<const double> x, std::span<const double> y, double p);

/// Eigenvalue convergence along an arbitrary weight family with a declared
/// weak* limit field: reports |lambda_k^eps - lambda_k| per family member and
/// a convergence verdict, with no rate claim.
ConstantReport general_weight_convergence(const std::vector<WeightField>& family,
                                          const WeightField& limit_field,
                                          const GagliardoDiscretization& disc, int K,
                                          const MinimizerOptions& opts = {});

}  // namespace fraclab
