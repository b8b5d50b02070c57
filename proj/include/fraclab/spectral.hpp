#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fraclab/forms.hpp"
#include "fraclab/gagliardo.hpp"

namespace fraclab {

struct ProblemTag {
    FormVariant variant = FormVariant::DirichletExterior;
    FracParams params;
    std::string weight;
    double epsilon = 0.0;  // 0 = not an oscillating problem / limit
};

/// Ascending eigenvalues with M-orthonormal eigenvectors (columns).
/// Eigenvalues within 1e-9 relative of each other share a cluster id;
/// eigenvector identity inside a cluster is not contractual.
struct Spectrum {
    std::vector<double> eigenvalues;
    Eigen::MatrixXd eigenvectors;
    std::vector<int> cluster_ids;
    ProblemTag tag;

    int size() const { return static_cast<int>(eigenvalues.size()); }
};

/// First K eigenpairs of A v = lambda M v via Cholesky reduction of M and a
/// dense symmetric eigendecomposition. Validates the Spectrum invariants
/// (residual and M-orthonormality within 1e-8) and throws NumericalError on
/// violation or factorization failure, std::invalid_argument for K out of range.
Spectrum solve_linear_gevp(const Eigen::MatrixXd& A, const Eigen::MatrixXd& M, int K,
                           ProblemTag tag = {});

struct MinimizerOptions {
    int max_iters = 4000;
    int restarts = 2;          // number of random starts (>= 1)
    bool warm_start = true;    // additionally seed with the p=2 first eigenvector
    double tol_rel_decrease = 1e-11;
    int patience = 5;          // consecutive below-tol decreases before stopping
    double initial_step = 0.1; // relative to |u| / |grad|
    double backtrack = 0.5;
    double grow = 1.5;
    int max_backtracks = 45;
    std::uint64_t seed = 20240901ULL;
};

struct MinimizeResult {
    double lambda = 0.0;
    std::vector<double> u;  // free dofs, normalized to N_p(u) = 1
    int iterations = 0;
    std::vector<double> history;  // quotient per accepted step (best restart)
};

/// Projected-gradient minimization of the Rayleigh quotient
///   Dirichlet:  E(u) / N_rho(u)   with E = kernel + exterior energy,
///   Neumann:   (E_reg(u) + N_1(u)) / N_rho(u),
/// renormalizing N_rho(u) = 1 each step with backtracking line search and
/// enforced monotone decrease. Returns the best restart. Throws
/// ConvergenceError (carrying the last iterate and quotient history) when no
/// restart reaches the tolerance within max_iters.
MinimizeResult min_rayleigh_p(const GagliardoDiscretization& disc, const MassMatrix& mass,
                              const MinimizerOptions& opts = {});

/// Unit-weight Dirichlet eigenvalues mu_{k,p}. Full Spectrum for p = 2; for
/// general p a single-pair Spectrum holding (mu_1, u_1) from min_rayleigh_p.
Spectrum dirichlet_mu(const Grid1D& grid, const FracParams& params, int K, int quad_order = 6,
                      const MinimizerOptions& opts = {});

namespace detail {
/// Cluster ids for an ascending eigenvalue sequence (1e-9 relative gap).
std::vector<int> degeneracy_clusters(const std::vector<double>& eigenvalues);
}  // namespace detail

}  // namespace fraclab
