#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fraclab/gagliardo.hpp"
#include "fraclab/spectral.hpp"
#include "fraclab/weight.hpp"

namespace fraclab {

struct SweepConfig {
    double a = 0.0, b = 1.0;
    int n_cells = 1024;
    FracParams params;
    FormVariant variant = FormVariant::DirichletExterior;
    PeriodicWeight weight = PeriodicWeight::constant(1.0);
    std::vector<double> eps_list = {1.0 / 4, 1.0 / 8, 1.0 / 16, 1.0 / 32, 1.0 / 64};
    int K = 1;
    int quad_order = 6;
    std::uint64_t seed = 20240901ULL;
    int jobs = 1;
    std::string cache_dir;
    MinimizerOptions minimizer;
};

/// Least-squares line through (log eps, log error).
struct RateFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
    int pairs_used = 0;
};

struct SweepRecord {
    double eps = 0.0;
    int k = 1;
    double lambda_eps = 0.0;
    double lambda_limit = 0.0;
    double error = 0.0;
    bool eps_reciprocal = true;
    bool solved = true;
    std::string note;
};

struct BoundVerdicts {
    bool sandwich_ok = false;
    double sandwich_margin = 0.0;  // worst violation, <= 0 when fully satisfied
    bool ordering_ok = false;      // Neumann <= Dirichlet; only set when both sides known
    bool ordering_checked = false;
    double ordering_margin = 0.0;
    double envelope_C = 0.0;       // max over (k, eps) of error / (eps^s prefactor(mu_k))
    double envelope_spread = 0.0;  // max/min of per-eps envelope constants
    bool envelope_defined = false;
};

struct SweepReport {
    SweepConfig config;
    std::vector<SweepRecord> records;                // ordered by (eps index, k)
    std::vector<double> lambda_limit;                // per k
    std::vector<double> mu;                          // unit-weight Dirichlet eigenvalues
    std::vector<std::optional<RateFit>> fits;        // per k; nullopt = undefined (noise-level errors)
    BoundVerdicts verdicts;
    double prefactor_exponent = 1.5;                 // 1 + 1/p Dirichlet, 2 Neumann

    const SweepRecord* find(double eps, int k) const;
};

/// Runs the eps sweep with one discretization (form matrices depend only on
/// grid/s/p): per eps only the weighted mass changes. Limit eigenvalues come
/// from the constant mean field. Fills rates, envelope and sandwich verdicts.
/// Per-eps solver failures are annotated in the records instead of aborting.
SweepReport sweep(const SweepConfig& config);

/// Throws InsufficientDataError with fewer than 3 admissible pairs
/// (errors below 1e-13 are excluded as solver noise).
RateFit fit_rate(const std::vector<std::pair<double, double>>& pairs);

/// Re-evaluates the sandwich bound against a mu spectrum on the same grid/s/p
/// and, when a companion report of the other variant is supplied, the
/// Neumann <= Dirichlet ordering for every eps. Margins use tol = 1e-8 * mu_k.
BoundVerdicts check_bounds(const SweepReport& report, const Spectrum& mu, double rho_minus,
                           double rho_plus, const SweepReport* companion = nullptr);

/// Least-squares slope of log mu_k against log k over k in [k_lo, k_hi];
/// the Weyl target in n = 1 is 2s. Requires p = 2 and k_hi <= n_cells / 8.
RateFit weyl_fit(const Spectrum& mu, int k_lo, int k_hi, int n_cells);

}  // namespace fraclab
